"""Independent brute-force oracles shared by the test modules."""

import itertools
from collections import deque

import numpy as np

from mixperc.network import GeneralNetwork, NetEdge
from mixperc.qstate import PmsParams

GOOD = PmsParams(0.5, 0.0, 0.9)
BAD = PmsParams(1.0, 0.0, 1.0)  # product state, not entangled


def flood_fill(g, occupied):
    """Oracle: BFS components plus per-axis wrapping from unwrapped positions."""
    adj = [[] for _ in range(g.num_nodes)]
    for (a, b), d, on in zip(g.bonds, g.disp, occupied):
        if on:
            adj[a].append((b, d))
            adj[b].append((a, -d))
    labels = -np.ones(g.num_nodes, dtype=int)
    pos = np.zeros((g.num_nodes, 3), dtype=int)
    wraps = [False, False, False]
    for s in range(g.num_nodes):
        if labels[s] >= 0:
            continue
        labels[s] = s
        q = deque([s])
        while q:
            x = q.popleft()
            for y, d in adj[x]:
                if labels[y] < 0:
                    labels[y] = s
                    pos[y] = pos[x] + d
                    q.append(y)
                else:
                    for ax in range(3):
                        if pos[y][ax] != pos[x][ax] + d[ax]:
                            wraps[ax] = True
    return labels, tuple(wraps[: g.spec.dim])


def same_partition(a, b):
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def simple_paths(n, a, b):
    usable = [i for i, e in enumerate(n.edges) if e.state.entangled and e.u != e.v]
    out = []

    def walk(x, seen, used):
        if x == b:
            out.append(frozenset(used))
            return
        for i in usable:
            e = n.edges[i]
            if x in (e.u, e.v):
                y = e.v if x == e.u else e.u
                if y not in seen:
                    walk(y, seen | {y}, used + [i])

    walk(a, {a}, [])
    return out


def two_disjoint_paths(n, a, b):
    paths = simple_paths(n, a, b)
    return any(not (p & q) for p, q in itertools.combinations(paths, 2))


def connected_without(n, a, b, removed):
    adj = {}
    for i, e in enumerate(n.edges):
        if e.state.entangled and e.u != e.v and i not in removed:
            adj.setdefault(e.u, []).append(e.v)
            adj.setdefault(e.v, []).append(e.u)
    seen, stack = {a}, [a]
    while stack:
        for y in adj.get(stack.pop(), []):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return b in seen


def random_network(rng):
    """Multigraph on 2..8 nodes with up to 12 edges, a quarter of them unentangled."""
    k = int(rng.integers(2, 9))
    nodes = [f"n{i}" for i in range(k)]
    edges = []
    for _ in range(int(rng.integers(0, 13))):
        u, v = rng.choice(k, 2, replace=True)
        edges.append((nodes[u], nodes[v], GOOD if rng.random() < 0.75 else BAD))
    return GeneralNetwork([NetEdge(u, v, s) for u, v, s in edges], (nodes[0], nodes[-1]), nodes)
