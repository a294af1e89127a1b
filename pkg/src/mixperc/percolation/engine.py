"""
Bond percolation Monte Carlo.

Sampling is coupled: every trial draws one uniform per bond and a bond is
occupied iff its uniform is below ``p``. Trial ``t`` under master seed ``s``
always sees the same uniforms, whichever worker runs it, so results depend
only on ``(seed, trials)`` and crossing events are monotone in ``p`` trial by
trial.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import ConvergenceError, DomainError
from .lattice import Boundary, LatticeGraph, LatticeSpec, build_lattice
from .unionfind import ANY_AXIS, first_wrap, label_clusters

CROSSING_AXIS = 0


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent counter-based stream for one trial."""
    ss = np.random.SeedSequence(int(seed) % 2**64, spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def bond_uniforms(g: LatticeGraph, seed: int, trial: int = 0) -> np.ndarray:
    return trial_rng(seed, trial).random(g.num_bonds)


def _check_p(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"occupation probability {p!r} outside [0, 1]")
    return p


def sample_occupancy(g: LatticeGraph, p: float, seed: int, trial: int = 0) -> np.ndarray:
    """Boolean mask of occupied bonds."""
    return bond_uniforms(g, seed, trial) < _check_p(p)


def run_trials(fn: Callable[[int], object], trials: int, workers: int = 1) -> list:
    """Evaluate ``fn`` on ``range(trials)``; results come back in trial order."""
    if trials < 1:
        raise DomainError("need at least one trial")
    if workers <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


@dataclass
class Estimate:
    value: float
    stderr: float
    trials: int

    @classmethod
    def from_hits(cls, hits: np.ndarray) -> "Estimate":
        n = len(hits)
        m = float(np.mean(hits))
        return cls(m, math.sqrt(m * (1 - m) / n), n)


@dataclass
class ClusterStats:
    largest_fraction: float
    crossing: bool
    labels: np.ndarray
    wraps: tuple

    @property
    def num_clusters(self) -> int:
        return len(np.unique(self.labels))


def _spans(g: LatticeGraph, labels: np.ndarray, axis: int) -> bool:
    c = g.coords[:, axis]
    low = set(labels[c == c.min()].tolist())
    high = labels[c == c.max()]
    return any(x in low for x in high.tolist())


def cluster_stats(g: LatticeGraph, occupied: np.ndarray, axis: int = CROSSING_AXIS) -> ClusterStats:
    """Clusters of the occupied bonds.

    ``crossing`` means a cluster wraps along ``axis`` (wrapped lattice) or
    touches both faces normal to ``axis`` (open lattice).
    """
    occupied = np.asarray(occupied, dtype=bool)
    if occupied.shape != (g.num_bonds,):
        raise DomainError("occupancy mask does not match the bond list")
    roots, wrapped = label_clusters(g.num_nodes, g.bonds, g.disp, occupied)
    _, labels, counts = np.unique(roots, return_inverse=True, return_counts=True)
    wraps = tuple(bool(wrapped[:, ax].any()) for ax in range(g.spec.dim))
    if g.spec.boundary is Boundary.WRAP:
        crossing = wraps[axis] if axis != ANY_AXIS else any(wraps)
    else:
        axes = range(g.spec.dim) if axis == ANY_AXIS else [axis]
        crossing = any(_spans(g, labels, ax) for ax in axes)
    return ClusterStats(float(counts.max()) / g.num_nodes, crossing, labels, wraps)


def crossing_probability(
    g: LatticeGraph, p: float, trials: int, seed: int, workers: int = 1, axis: int = CROSSING_AXIS
) -> tuple:
    """Crossing probability and mean largest-cluster fraction at ``p``."""
    p = _check_p(p)

    def one(t):
        st = cluster_stats(g, bond_uniforms(g, seed, t) < p, axis)
        return st.crossing, st.largest_fraction

    res = run_trials(one, trials, workers)
    hits = np.array([r[0] for r in res], dtype=float)
    return Estimate.from_hits(hits), float(np.mean([r[1] for r in res]))


def connection_probabilities(
    g: LatticeGraph,
    p: float,
    pairs: Sequence[tuple],
    trials: int,
    seed: int,
    workers: int = 1,
) -> tuple:
    """Probability that each node pair ends up in one cluster.

    All pairs share the same trials. Also returns the mean largest-cluster
    fraction.
    """
    p = _check_p(p)
    pairs = [(int(a), int(b)) for a, b in pairs]
    for a, b in pairs:
        if not (0 <= a < g.num_nodes and 0 <= b < g.num_nodes):
            raise DomainError(f"node pair {(a, b)} not in the lattice")
    idx_a = np.array([a for a, _ in pairs], dtype=np.int64)
    idx_b = np.array([b for _, b in pairs], dtype=np.int64)

    def one(t):
        roots, _ = label_clusters(g.num_nodes, g.bonds, g.disp, bond_uniforms(g, seed, t) < p)
        largest = np.bincount(roots).max() / g.num_nodes
        return roots[idx_a] == roots[idx_b], largest

    res = run_trials(one, trials, workers)
    hits = np.array([r[0] for r in res], dtype=float).reshape(trials, len(pairs))
    ests = [Estimate.from_hits(hits[:, j]) for j in range(len(pairs))]
    return ests, float(np.mean([r[1] for r in res]))


def connection_probability(
    g: LatticeGraph, p: float, a: int, b: int, trials: int, seed: int, workers: int = 1
) -> Estimate:
    return connection_probabilities(g, p, [(a, b)], trials, seed, workers)[0][0]


def critical_occupation(g: LatticeGraph, seed: int, trial: int, axis: int = CROSSING_AXIS) -> float:
    """Smallest ``p`` at which this trial's sample wraps along ``axis``.

    Bonds are added in increasing order of their uniforms (the Newman-Ziff
    ordering); the uniform of the bond that first closes a wrapping loop is
    the critical value. ``inf`` if the full lattice never wraps.
    """
    if g.spec.boundary is not Boundary.WRAP:
        raise DomainError("critical occupation needs a wrapped lattice")
    u = bond_uniforms(g, seed, trial)
    cut = 1 / 8
    while True:
        cand = np.flatnonzero(u < cut) if cut < 1 else np.arange(len(u))
        order = cand[np.argsort(u[cand], kind="stable")]
        k = first_wrap(g.num_nodes, g.bonds, g.disp, order, axis)
        if k >= 0:
            return float(u[order[k]])
        if cut >= 1:
            return math.inf
        cut *= 2


def critical_occupations(
    g: LatticeGraph, trials: int, seed: int, workers: int = 1, axis: int = CROSSING_AXIS
) -> np.ndarray:
    return np.array(run_trials(lambda t: critical_occupation(g, seed, t, axis), trials, workers))


@dataclass
class ThresholdEstimate:
    kind: str
    size: int
    trials: int
    estimate: float
    reference: float
    iterations: int
    crossing_at_estimate: float

    @property
    def deviation(self) -> float:
        return self.estimate - self.reference


def estimate_threshold(
    spec: LatticeSpec,
    trials: int,
    tol: float = 0.005,
    seed: int = 0,
    workers: int = 1,
    max_iter: int = 60,
    axis: int = CROSSING_AXIS,
) -> ThresholdEstimate:
    """Bisect the wrapping probability for the point where it equals 1/2.

    Every bisection point reuses the same coupled trials, so the crossing
    probability at ``p`` is the fraction of trials whose critical occupation
    is at most ``p``.
    """
    if tol < 0.005:
        raise DomainError("threshold tolerance must be at least 0.005")
    spec = LatticeSpec(spec.kind, spec.size, Boundary.WRAP)
    g = build_lattice(spec)
    crit = critical_occupations(g, trials, seed, workers, axis)

    def crossing(p):
        return float(np.mean(crit <= p))

    lo, hi = 0.0, 1.0
    if crossing(hi) < 0.5 or crossing(lo) >= 0.5:
        raise ConvergenceError(
            f"crossing probability does not bracket 1/2 on [0, 1] "
            f"(values {crossing(lo):.3f}, {crossing(hi):.3f})"
        )
    it = 0
    while hi - lo > tol:
        it += 1
        if it > max_iter:
            raise ConvergenceError(f"bisection did not reach width {tol} in {max_iter} steps")
        mid = (lo + hi) / 2
        if crossing(mid) >= 0.5:
            hi = mid
        else:
            lo = mid
    est = (lo + hi) / 2
    return ThresholdEstimate(
        kind=spec.kind.value,
        size=spec.size,
        trials=trials,
        estimate=est,
        reference=spec.threshold,
        iterations=it,
        crossing_at_estimate=crossing(est),
    )
