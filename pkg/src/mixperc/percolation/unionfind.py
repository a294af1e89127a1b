"""
Union-find with path compression, union by rank and displacement tracking.

Each node stores its lattice displacement relative to its parent. Joining
two nodes that already share a root closes a loop; if the loop's net
displacement is nonzero the cluster wraps around the periodic boundary.

The kernels are compiled with numba and release the GIL, so trials can run
on a thread pool.
"""

from __future__ import annotations

import numpy as np
from numba import njit

ANY_AXIS = -1


@njit(cache=True, nogil=True)
def uf_find(parent, offs, x):
    """Root of ``x``; afterwards ``offs[x]`` is ``x``'s position relative to it."""
    root = x
    tx = 0
    ty = 0
    tz = 0
    while parent[root] != root:
        tx += offs[root, 0]
        ty += offs[root, 1]
        tz += offs[root, 2]
        root = parent[root]
    y = x
    while parent[y] != y:
        nxt = parent[y]
        ox, oy, oz = offs[y, 0], offs[y, 1], offs[y, 2]
        offs[y, 0] = tx
        offs[y, 1] = ty
        offs[y, 2] = tz
        parent[y] = root
        tx -= ox
        ty -= oy
        tz -= oz
        y = nxt
    return root


@njit(cache=True, nogil=True)
def uf_union(parent, rank, offs, a, b, dx, dy, dz, winding):
    """Join ``a`` and ``b`` (``b`` sits at ``a + (dx, dy, dz)``).

    Returns True when they were already connected, in which case
    ``winding`` receives the net displacement of the closed loop.
    """
    ra = uf_find(parent, offs, a)
    rb = uf_find(parent, offs, b)
    ax = offs[a, 0] if a != ra else 0
    ay = offs[a, 1] if a != ra else 0
    az = offs[a, 2] if a != ra else 0
    bx = offs[b, 0] if b != rb else 0
    by = offs[b, 1] if b != rb else 0
    bz = offs[b, 2] if b != rb else 0
    # position of rb relative to ra
    rx = ax + dx - bx
    ry = ay + dy - by
    rz = az + dz - bz
    if ra == rb:
        winding[0] = rx
        winding[1] = ry
        winding[2] = rz
        return True
    if rank[ra] < rank[rb]:
        parent[ra] = rb
        offs[ra, 0] = -rx
        offs[ra, 1] = -ry
        offs[ra, 2] = -rz
    else:
        parent[rb] = ra
        offs[rb, 0] = rx
        offs[rb, 1] = ry
        offs[rb, 2] = rz
        if rank[ra] == rank[rb]:
            rank[ra] += 1
    return False


@njit(cache=True, nogil=True)
def _wraps(winding, axis):
    if axis == ANY_AXIS:
        return winding[0] != 0 or winding[1] != 0 or winding[2] != 0
    return winding[axis] != 0


@njit(cache=True, nogil=True)
def first_wrap(n_nodes, bonds, disp, order, axis):
    """Position in ``order`` of the bond whose addition first creates a wrap, or -1."""
    parent = np.arange(n_nodes)
    rank = np.zeros(n_nodes, dtype=np.int64)
    offs = np.zeros((n_nodes, 3), dtype=np.int64)
    winding = np.zeros(3, dtype=np.int64)
    for k in range(order.shape[0]):
        i = order[k]
        closed = uf_union(
            parent, rank, offs, bonds[i, 0], bonds[i, 1], disp[i, 0], disp[i, 1], disp[i, 2], winding
        )
        if closed and _wraps(winding, axis):
            return k
    return -1


@njit(cache=True, nogil=True)
def label_clusters(n_nodes, bonds, disp, occupied):
    """Root label per node and per-axis wrap flags for the occupied bonds."""
    parent = np.arange(n_nodes)
    rank = np.zeros(n_nodes, dtype=np.int64)
    offs = np.zeros((n_nodes, 3), dtype=np.int64)
    winding = np.zeros(3, dtype=np.int64)
    wrapped = np.zeros((n_nodes, 3), dtype=np.bool_)
    for i in range(bonds.shape[0]):
        if not occupied[i]:
            continue
        if uf_union(parent, rank, offs, bonds[i, 0], bonds[i, 1], disp[i, 0], disp[i, 1], disp[i, 2], winding):
            r = uf_find(parent, offs, bonds[i, 0])
            for ax in range(3):
                if winding[ax] != 0:
                    wrapped[r, ax] = True
    labels = np.empty(n_nodes, dtype=np.int64)
    for x in range(n_nodes):
        labels[x] = uf_find(parent, offs, x)
    # wrap flags recorded on a root that was later absorbed move to the final root
    for x in range(n_nodes):
        r = labels[x]
        for ax in range(3):
            if wrapped[x, ax]:
                wrapped[r, ax] = True
    return labels, wrapped


class UnionFind:
    """Disjoint sets over ``n`` nodes with displacement bookkeeping."""

    def __init__(self, n: int):
        self.parent = np.arange(n)
        self.rank = np.zeros(n, dtype=np.int64)
        self.offs = np.zeros((n, 3), dtype=np.int64)
        self._winding = np.zeros(3, dtype=np.int64)

    def find(self, x: int) -> int:
        return int(uf_find(self.parent, self.offs, x))

    def union(self, a: int, b: int, disp=(0, 0, 0)):
        """Merge the sets of ``a`` and ``b``.

        Returns None when two sets were merged, otherwise the net
        displacement of the loop just closed (all zeros for an ordinary loop).
        """
        d = tuple(disp) + (0,) * (3 - len(disp))
        closed = uf_union(self.parent, self.rank, self.offs, a, b, d[0], d[1], d[2], self._winding)
        return tuple(int(w) for w in self._winding) if closed else None

    def components(self) -> list:
        groups = {}
        for x in range(len(self.parent)):
            groups.setdefault(self.find(x), []).append(x)
        return sorted(groups.values())
