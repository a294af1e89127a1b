"""
Mixed-state networks: singlet feasibility, per-bond conversion probabilities
and percolation of the resulting classical bond model.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import DomainError
from .percolation import (
    Kind,
    LatticeGraph,
    LatticeSpec,
    THRESHOLDS,
    build_lattice,
    connection_probabilities,
)
from .protocols import (
    scp_cep_1d,
    scp_cep_square,
    scp_direct_1d,
    scp_distillable_subspace,
    scp_hybrid_1d,
    scp_pair,
    scp_recycling,
    scp_square,
)
from .qstate import PmsParams
from .sweep import SweepResult


# --- general networks and the two-path condition ---------------------------


@dataclass(frozen=True)
class NetEdge:
    u: str
    v: str
    state: PmsParams


@dataclass
class GeneralNetwork:
    """Multigraph whose edges each carry one two-qubit mixed state."""

    edges: list
    terminals: tuple
    nodes: list = field(default_factory=list)

    def __post_init__(self):
        seen = list(self.nodes)
        for e in self.edges:
            for x in (e.u, e.v):
                if x not in seen:
                    seen.append(x)
        self.nodes = seen
        if len(self.terminals) != 2:
            raise DomainError("a network needs exactly two terminals")


@dataclass
class Feasibility:
    feasible: bool
    flow: int
    paths: Optional[list] = None
    cut: Optional[list] = None

    def to_json(self) -> dict:
        return {"feasible": self.feasible, "flow": self.flow, "paths": self.paths, "cut": self.cut}


def feasibility_check(net: GeneralNetwork, a=None, b=None) -> Feasibility:
    """Whether ``a`` and ``b`` are joined by two edge-disjoint paths of entangled edges.

    Unit-capacity max-flow over the entangled edges, augmenting along
    breadth-first paths with edges visited in index order. A feasible answer
    carries two paths (lists of edge indices); an infeasible one the
    qualifying edges of a minimum cut.
    """
    a, b = (net.terminals if a is None else (a, b))
    for x in (a, b):
        if x not in net.nodes:
            raise DomainError(f"terminal {x!r} is not a node of the network")
    if a == b:
        raise DomainError("terminals must differ")

    usable = [i for i, e in enumerate(net.edges) if e.state.entangled and e.u != e.v]
    adj = {x: [] for x in net.nodes}
    for i in usable:
        e = net.edges[i]
        adj[e.u].append(i)
        adj[e.v].append(i)
    flow = {i: 0 for i in usable}  # +1: u -> v, -1: v -> u

    def step(i, x):
        e = net.edges[i]
        if x == e.u and flow[i] <= 0:
            return e.v, 1
        if x == e.v and flow[i] >= 0:
            return e.u, -1
        return None, 0

    def augment() -> bool:
        prev = {a: None}
        queue = deque([a])
        while queue and b not in prev:
            x = queue.popleft()
            for i in adj[x]:
                y, d = step(i, x)
                if y is not None and y not in prev:
                    prev[y] = (x, i, d)
                    queue.append(y)
        if b not in prev:
            return False
        y = b
        while prev[y] is not None:
            x, i, d = prev[y]
            flow[i] += d
            y = x
        return True

    value = 0
    while augment():
        value += 1

    if value >= 2:
        return Feasibility(True, value, paths=_decompose(net, flow, a, b, 2))
    reach = {a}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        for i in adj[x]:
            y, _ = step(i, x)
            if y is not None and y not in reach:
                reach.add(y)
                queue.append(y)
    cut = [i for i in usable if (net.edges[i].u in reach) != (net.edges[i].v in reach)]
    return Feasibility(False, value, cut=cut)


def _decompose(net, flow, a, b, count) -> list:
    """Split a flow into ``count`` edge-disjoint a-b paths (edge index lists)."""
    left = {i: f for i, f in flow.items() if f}
    paths = []
    for _ in range(count):
        x, path, nodes = a, [], [a]
        while x != b:
            for i in sorted(left):
                e = net.edges[i]
                if (left[i] == 1 and e.u == x) or (left[i] == -1 and e.v == x):
                    y = e.v if e.u == x else e.u
                    del left[i]
                    break
            if y in nodes:  # drop a circulation
                k = nodes.index(y)
                nodes, path = nodes[: k + 1], path[:k]
            else:
                nodes.append(y)
                path.append(i)
            x = y
        paths.append(path)
    return paths


def network_from_json(doc: dict) -> GeneralNetwork:
    """Build a network from the JSON description format (see README)."""
    try:
        edges = [
            NetEdge(
                str(e["u"]),
                str(e["v"]),
                PmsParams(float(e["alpha"]), float(e.get("gamma", 0.0)), float(e["lambda"])),
            )
            for e in doc["edges"]
        ]
        terminals = tuple(str(t) for t in doc["terminals"])
    except KeyError as exc:
        raise DomainError(f"network description is missing field {exc}") from None
    return GeneralNetwork(edges, terminals, [str(n) for n in doc.get("nodes", [])])


def network_to_json(net: GeneralNetwork) -> dict:
    return {
        "nodes": list(net.nodes),
        "edges": [
            {"u": e.u, "v": e.v, "alpha": e.state.alpha, "gamma": e.state.gamma, "lambda": e.state.lam}
            for e in net.edges
        ],
        "terminals": list(net.terminals),
    }


def load_network(path) -> GeneralNetwork:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read network description {str(path)!r}: {exc}") from None
    return network_from_json(doc)


# --- bonds and strategies ----------------------------------------------------


class StrategyKind(str, Enum):
    CEP_PAIRWISE = "cep_pairwise"
    CEP_RECYCLING = "cep_recycling"
    CEP_SUBSPACE = "cep_subspace"
    HYBRID_1D = "hybrid_1d"
    DIRECT_1D = "direct_1d"
    SQUARE_EMBED = "square_embed"
    FCC_HYBRID_EMBED = "fcc_hybrid_embed"


PLAIN = {StrategyKind.CEP_PAIRWISE, StrategyKind.CEP_RECYCLING, StrategyKind.CEP_SUBSPACE}
TWO_EDGE_GAMMA0 = {
    StrategyKind.HYBRID_1D,
    StrategyKind.DIRECT_1D,
    StrategyKind.SQUARE_EMBED,
    StrategyKind.FCC_HYBRID_EMBED,
}


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind
    n: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind(self.kind))

    def arity(self, model: "BondModel") -> int:
        if self.kind in (StrategyKind.CEP_RECYCLING, StrategyKind.CEP_SUBSPACE):
            return self.n if self.n is not None else len(model.edges)
        return 2


@dataclass(frozen=True)
class BondModel:
    """The edges making up every bond of a regular network."""

    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        if not self.edges:
            raise DomainError("a bond needs at least one edge")

    @classmethod
    def identical(cls, n: int, alpha: float, lam: float, gamma: float = 0.0) -> "BondModel":
        return cls((PmsParams(alpha, gamma, lam),) * n)

    @property
    def entangled_edges(self) -> int:
        return sum(e.entangled for e in self.edges)

    @property
    def feasible(self) -> bool:
        return self.entangled_edges >= 2


@dataclass(frozen=True)
class BondScp:
    probability: float
    feasible: bool


def _two_edges(model: BondModel, strat: Strategy) -> tuple:
    first, second = model.edges
    if strat.kind in TWO_EDGE_GAMMA0 and (first.gamma or second.gamma):
        raise DomainError(f"{strat.kind.value} has a closed form only for gamma = 0")
    return first.alpha, first.lam, second.alpha, second.lam


def _identical(model: BondModel, strat: Strategy) -> PmsParams:
    e = model.edges[0]
    if any(x != e for x in model.edges) or e.gamma:
        raise DomainError(f"{strat.kind.value} needs identical edges with gamma = 0")
    return e


def bond_scp(model: BondModel, strat: Strategy) -> BondScp:
    """Singlet probability of one (super-)bond under ``strat``."""
    if not model.feasible:
        return BondScp(0.0, False)
    if strat.arity(model) != len(model.edges):
        raise DomainError(
            f"{strat.kind.value} acts on {strat.arity(model)} edges, bond has {len(model.edges)}"
        )
    k = strat.kind
    if k is StrategyKind.CEP_PAIRWISE:
        p = scp_pair(*model.edges)
    elif k is StrategyKind.CEP_RECYCLING:
        e = _identical(model, strat)
        p = scp_recycling(len(model.edges), e.alpha, e.lam)
    elif k is StrategyKind.CEP_SUBSPACE:
        e = _identical(model, strat)
        p = scp_distillable_subspace(len(model.edges), e.alpha, e.lam)
    elif k in (StrategyKind.HYBRID_1D, StrategyKind.FCC_HYBRID_EMBED):
        p = scp_hybrid_1d(*_two_edges(model, strat))
    elif k is StrategyKind.DIRECT_1D:
        p = scp_direct_1d(*_two_edges(model, strat))
    else:
        p = scp_square(*_two_edges(model, strat))
    return BondScp(p, True)


@dataclass(frozen=True)
class EffectiveLattice:
    spec: LatticeSpec
    probability: float
    comparator: Optional[float]
    feasible: bool = True

    @property
    def threshold(self) -> float:
        return THRESHOLDS[self.spec.kind]

    @property
    def supercritical(self) -> bool:
        return self.probability > self.threshold


def effective_lattice(base: LatticeSpec, strat: Strategy, model: BondModel) -> EffectiveLattice:
    """Classical bond model seen by the percolation engine.

    Embedded strategies turn a small nested arrangement into one occupied
    bond of the larger lattice; the comparator is what plain CEP achieves
    on the same arrangement.
    """
    k = strat.kind
    res = bond_scp(model, strat)
    if k in PLAIN:
        return EffectiveLattice(base, res.probability, None, res.feasible)
    if k is StrategyKind.FCC_HYBRID_EMBED:
        if base.kind is not Kind.FCC:
            raise DomainError("hybrid-swapping embedding produces an fcc lattice")
        comp = scp_cep_1d(*_two_edges(model, strat)) if res.feasible else 0.0
        return EffectiveLattice(base, res.probability, comp, res.feasible)
    if k is StrategyKind.SQUARE_EMBED:
        if base.kind is not Kind.TRIANGULAR:
            raise DomainError("square-protocol embedding produces a triangular lattice")
        comp = scp_cep_square(*_two_edges(model, strat)) if res.feasible else 0.0
        return EffectiveLattice(base, res.probability, comp, res.feasible)
    raise DomainError(f"{k.value} is a 1D arrangement with no lattice embedding")


def graph_distances(g: LatticeGraph, pairs: Sequence[tuple]) -> list:
    """Hop counts between lattice node pairs (-1 if disconnected)."""
    n = g.num_nodes
    adj = csr_matrix(
        (np.ones(g.num_bonds), (g.bonds[:, 0], g.bonds[:, 1])), shape=(n, n)
    )
    sources = sorted({int(a) for a, _ in pairs})
    dist = shortest_path(adj, directed=False, unweighted=True, indices=sources)
    row = {a: i for i, a in enumerate(sources)}
    out = []
    for a, b in pairs:
        d = dist[row[int(a)], int(b)]
        out.append(int(d) if np.isfinite(d) else -1)
    return out


def run_network(
    spec: LatticeSpec,
    model: BondModel,
    strat: Strategy,
    pairs: Sequence[tuple],
    trials: int,
    seed: int,
    workers: int = 1,
    p_bond: Optional[float] = None,
) -> SweepResult:
    """Connection probabilities between node pairs of a percolating network.

    ``pairs`` hold node indices. ``p_bond`` overrides the probability derived
    from ``model`` and ``strat`` (useful for exploring the classical model).
    """
    eff = effective_lattice(spec, strat, model)
    p = eff.probability if p_bond is None else float(p_bond)
    g = build_lattice(spec)
    ests, largest = connection_probabilities(g, p, pairs, trials, seed, workers)
    res = SweepResult(
        header=[
            "node_a",
            "node_b",
            "distance",
            "p_bond",
            "threshold",
            "supercritical",
            "connection_probability",
            "stderr",
            "largest_cluster_fraction",
        ],
        metadata={
            "lattice": spec.kind.value,
            "size": spec.size,
            "boundary": spec.boundary.value,
            "strategy": strat.kind.value,
            "comparator": eff.comparator,
            "feasible": eff.feasible,
            "trials": trials,
            "seed": seed,
        },
    )
    for (a, b), est, dist in zip(pairs, ests, graph_distances(g, pairs)):
        res.add(
            int(a),
            int(b),
            dist,
            p,
            eff.threshold,
            p > eff.threshold,
            est.value,
            est.stderr,
            largest,
        )
    return res
