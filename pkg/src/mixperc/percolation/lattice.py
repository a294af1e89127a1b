"""Lattice graphs for bond percolation."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import DomainError


class Kind(str, Enum):
    TRIANGULAR = "triangular"
    SQUARE = "square"
    HONEYCOMB = "honeycomb"
    FCC = "fcc"


class Boundary(str, Enum):
    OPEN = "open"
    WRAP = "wrap"


# Infinite-lattice bond percolation thresholds.
THRESHOLDS = {
    Kind.TRIANGULAR: 2 * math.sin(math.pi / 18),
    Kind.SQUARE: 0.5,
    Kind.HONEYCOMB: 1 - 2 * math.sin(math.pi / 18),
    Kind.FCC: 0.120,
}

COORDINATION = {Kind.TRIANGULAR: 6, Kind.SQUARE: 4, Kind.HONEYCOMB: 3, Kind.FCC: 12}

_FCC_FORWARD = [(1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1)]


@dataclass(frozen=True)
class LatticeSpec:
    kind: Kind
    size: int
    boundary: Boundary = Boundary.WRAP

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if int(self.size) != self.size or self.size < 2:
            raise DomainError(f"lattice size must be an integer >= 2, got {self.size!r}")
        if self.kind is Kind.HONEYCOMB and self.boundary is Boundary.WRAP and self.size % 2:
            raise DomainError("a wrapped honeycomb (brick-wall) lattice needs an even size")

    @property
    def dim(self) -> int:
        return 3 if self.kind is Kind.FCC else 2

    @property
    def extent(self) -> int:
        """Number of integer coordinate values along each axis."""
        return 2 * self.size if self.kind is Kind.FCC else self.size

    @property
    def threshold(self) -> float:
        return THRESHOLDS[self.kind]


@dataclass
class LatticeGraph:
    """Nodes with integer coordinates and nearest-neighbour bonds.

    ``disp[i]`` is the lattice displacement from ``bonds[i, 0]`` to
    ``bonds[i, 1]``; across a wrapped boundary it differs from the plain
    coordinate difference, which is what wrap detection relies on.
    """

    spec: LatticeSpec
    coords: np.ndarray
    bonds: np.ndarray
    disp: np.ndarray
    coordination: int
    _index: dict = field(default_factory=dict, repr=False)

    @property
    def num_nodes(self) -> int:
        return len(self.coords)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    def node(self, *coord: int) -> int:
        """Index of the node at ``coord``."""
        try:
            return self._index[tuple(int(c) for c in coord)]
        except KeyError:
            raise DomainError(f"no node at {coord}") from None

    def degrees(self) -> np.ndarray:
        return np.bincount(self.bonds.ravel(), minlength=self.num_nodes)


def _sites(spec: LatticeSpec) -> list:
    n = spec.extent
    pts = itertools.product(range(n), repeat=spec.dim)
    if spec.kind is Kind.FCC:
        return [p for p in pts if sum(p) % 2 == 0]
    return list(pts)


def _forward_offsets(kind: Kind, site: tuple) -> list:
    if kind is Kind.SQUARE:
        return [(1, 0), (0, 1)]
    if kind is Kind.TRIANGULAR:
        return [(1, 0), (0, 1), (1, 1)]
    if kind is Kind.HONEYCOMB:
        # brick wall: every row is a chain, rungs on alternating sites
        return [(1, 0), (0, 1)] if sum(site) % 2 == 0 else [(1, 0)]
    return _FCC_FORWARD


def build_lattice(spec: LatticeSpec) -> LatticeGraph:
    sites = _sites(spec)
    index = {s: i for i, s in enumerate(sites)}
    n = spec.extent
    wrap = spec.boundary is Boundary.WRAP
    seen = {}
    for s in sites:
        for off in _forward_offsets(spec.kind, s):
            t = tuple(c + o for c, o in zip(s, off))
            if wrap:
                t = tuple(c % n for c in t)
            elif any(c < 0 or c >= n for c in t):
                continue
            a, b = index[s], index[t]
            if a == b:
                continue
            d = off if a < b else tuple(-o for o in off)
            key = (min(a, b), max(a, b))
            seen.setdefault(key, d)
    keys = sorted(seen)
    bonds = np.array(keys, dtype=np.int64).reshape(-1, 2)
    disp = np.zeros((len(keys), 3), dtype=np.int64)
    if keys:
        disp[:, : spec.dim] = np.array([seen[k] for k in keys], dtype=np.int64)
    return LatticeGraph(
        spec=spec,
        coords=np.array(sites, dtype=np.int64),
        bonds=bonds,
        disp=disp,
        coordination=COORDINATION[spec.kind],
        _index=index,
    )
