import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import flood_fill, same_partition

from mixperc.errors import ConvergenceError, DomainError
from mixperc.percolation import (
    ANY_AXIS,
    THRESHOLDS,
    Kind,
    LatticeSpec,
    UnionFind,
    build_lattice,
    cluster_stats,
    connection_probabilities,
    connection_probability,
    critical_occupation,
    critical_occupations,
    crossing_probability,
    estimate_threshold,
    sample_occupancy,
)


# --- lattices ---------------------------------------------------------------------------


def test_lattice_counts():
    g = build_lattice(LatticeSpec("square", 2, "open"))
    assert (g.num_nodes, g.num_bonds) == (4, 4)
    g = build_lattice(LatticeSpec("triangular", 3, "wrap"))
    assert (g.num_nodes, g.num_bonds) == (9, 27)
    g = build_lattice(LatticeSpec("fcc", 2, "wrap"))
    assert g.num_nodes == 32
    assert set(g.degrees().tolist()) == {12}


@pytest.mark.parametrize("kind,size", [("square", 6), ("triangular", 6), ("honeycomb", 6), ("fcc", 3)])
def test_degrees(kind, size):
    g = build_lattice(LatticeSpec(kind, size, "wrap"))
    assert set(g.degrees().tolist()) == {g.coordination}
    assert len({tuple(b) for b in g.bonds.tolist()}) == g.num_bonds
    assert np.all(g.bonds[:, 0] < g.bonds[:, 1])
    assert g.bonds.tolist() == sorted(g.bonds.tolist())
    g = build_lattice(LatticeSpec(kind, size, "open"))
    deg = g.degrees()
    assert deg.max() == g.coordination and deg.min() < g.coordination


def test_lattice_spec_validation():
    with pytest.raises(DomainError):
        LatticeSpec("square", 1)
    with pytest.raises(DomainError):
        LatticeSpec("honeycomb", 5, "wrap")
    with pytest.raises(ValueError):
        LatticeSpec("kagome", 4)
    assert LatticeSpec("fcc", 4).dim == 3


def test_thresholds():
    assert THRESHOLDS[Kind.TRIANGULAR] == pytest.approx(0.3473, abs=1e-4)
    assert THRESHOLDS[Kind.HONEYCOMB] == pytest.approx(0.6527, abs=1e-4)
    assert THRESHOLDS[Kind.TRIANGULAR] + THRESHOLDS[Kind.HONEYCOMB] == pytest.approx(1.0)


# --- union-find ----------------------------------------------------------------------------


def test_union_find_basics():
    uf = UnionFind(5)
    assert uf.union(0, 1) is None
    assert uf.union(1, 2) is None
    assert uf.union(0, 2) == (0, 0, 0)
    assert uf.find(2) == uf.find(uf.find(2))
    assert uf.components() == [[0, 1, 2], [3], [4]]


def test_union_find_reports_winding():
    # ring of 4 nodes along x, the last bond crossing the boundary
    uf = UnionFind(4)
    for a in range(3):
        uf.union(a, a + 1, (1, 0, 0))
    assert uf.union(3, 0, (1, 0, 0)) == (4, 0, 0)


@pytest.mark.parametrize(
    "kind,size", [("square", 10), ("triangular", 8), ("honeycomb", 10), ("fcc", 2), ("square", 3)]
)
def test_clusters_match_flood_fill(kind, size):
    rng = np.random.default_rng([size, len(kind)])
    for boundary in ("wrap", "open"):
        g = build_lattice(LatticeSpec(kind, size, boundary))
        assert g.num_nodes <= 100
        for _ in range(100):
            occ = rng.random(g.num_bonds) < rng.random()
            st_ = cluster_stats(g, occ)
            labels, wraps = flood_fill(g, occ)
            assert same_partition(st_.labels, labels)
            if boundary == "wrap":
                assert st_.wraps == wraps
                assert st_.crossing == wraps[0]


def test_cluster_stats_examples():
    g = build_lattice(LatticeSpec("square", 4, "wrap"))
    full = cluster_stats(g, np.ones(g.num_bonds, bool))
    assert full.num_clusters == 1 and full.crossing and full.largest_fraction == 1.0
    empty = cluster_stats(g, np.zeros(g.num_bonds, bool))
    assert not empty.crossing and empty.largest_fraction == 1 / g.num_nodes
    with pytest.raises(DomainError):
        cluster_stats(g, np.ones(3, bool))


def test_open_spanning_path():
    g = build_lattice(LatticeSpec("square", 4, "open"))
    path = {(g.node(x, 1), g.node(x + 1, 1)) for x in range(3)}
    occ = np.array([tuple(b) in path for b in g.bonds.tolist()])
    assert cluster_stats(g, occ, axis=0).crossing
    assert not cluster_stats(g, occ, axis=1).crossing
    assert cluster_stats(g, occ, axis=ANY_AXIS).crossing


def test_wrapped_straight_line_wraps_only_along_its_axis():
    g = build_lattice(LatticeSpec("square", 5, "wrap"))
    line = {tuple(sorted((g.node(x, 2), g.node((x + 1) % 5, 2)))) for x in range(5)}
    occ = np.array([tuple(b) in line for b in g.bonds.tolist()])
    st_ = cluster_stats(g, occ)
    assert st_.wraps == (True, False)


# --- sampling and statistics --------------------------------------------------------------------------


def test_sample_occupancy_examples():
    g = build_lattice(LatticeSpec("square", 71, "wrap"))
    assert not sample_occupancy(g, 0.0, 1).any()
    assert sample_occupancy(g, 1.0, 1).all()
    frac = sample_occupancy(g, 0.5, 1).mean()
    assert abs(frac - 0.5) < 5 * math.sqrt(0.25 / g.num_bonds)
    assert np.array_equal(sample_occupancy(g, 0.3, 9, 4), sample_occupancy(g, 0.3, 9, 4))
    with pytest.raises(DomainError):
        sample_occupancy(g, 1.5, 1)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**63), st.integers(0, 1000))
def test_coupled_sampling_is_monotone(p, q, seed, trial):
    g = build_lattice(LatticeSpec("triangular", 8))
    lo, hi = sorted((p, q))
    a, b = sample_occupancy(g, lo, seed, trial), sample_occupancy(g, hi, seed, trial)
    assert not np.any(a & ~b)
    assert cluster_stats(g, a).crossing <= cluster_stats(g, b).crossing


def test_crossing_determinism_and_workers():
    g = build_lattice(LatticeSpec("square", 24))
    one = crossing_probability(g, 0.5, 60, seed=5, workers=1)
    three = crossing_probability(g, 0.5, 60, seed=5, workers=3)
    assert one == three
    assert crossing_probability(g, 0.5, 60, seed=6) != one


def test_crossing_monotone_in_p():
    g = build_lattice(LatticeSpec("square", 16))
    vals = [crossing_probability(g, p, 80, seed=3)[0].value for p in np.linspace(0.3, 0.7, 9)]
    assert vals == sorted(vals)
    assert vals[0] == 0.0 and vals[-1] == 1.0


def test_critical_occupation_consistency():
    g = build_lattice(LatticeSpec("honeycomb", 12))
    crit = critical_occupations(g, 40, seed=2)
    direct = [crossing_probability(g, p, 40, seed=2)[0].value for p in (0.55, 0.65, 0.75)]
    assert direct == [float(np.mean(crit <= p)) for p in (0.55, 0.65, 0.75)]
    for t in range(5):
        c = critical_occupation(g, 2, t)
        assert cluster_stats(g, sample_occupancy(g, c, 2, t)).crossing is False
        u = np.nextafter(c, 1)
        assert cluster_stats(g, sample_occupancy(g, u, 2, t)).crossing


def test_critical_occupation_needs_wrap():
    with pytest.raises(DomainError):
        critical_occupation(build_lattice(LatticeSpec("square", 4, "open")), 0, 0)


def test_connection_probability_examples():
    g = build_lattice(LatticeSpec("square", 16))
    a, b = g.node(0, 0), g.node(5, 3)
    assert connection_probability(g, 1.0, a, b, 20, 1).value == 1.0
    assert connection_probability(g, 0.0, a, b, 20, 1).value == 0.0
    ests, largest = connection_probabilities(g, 0.6, [(a, b), (a, a)], 50, 1)
    assert ests[1].value == 1.0 and 0 < largest <= 1
    with pytest.raises(DomainError):
        connection_probability(g, 0.5, a, 10**6, 5, 1)


def test_connection_probability_stable_across_seeds():
    g = build_lattice(LatticeSpec("square", 64))
    a, b = g.node(10, 10), g.node(11, 10)
    e1 = connection_probability(g, 0.7, a, b, 400, 11)
    e2 = connection_probability(g, 0.7, a, b, 400, 12)
    assert abs(e1.value - e2.value) <= 3 * math.hypot(e1.stderr, e2.stderr)


# --- thresholds -------------------------------------------------------------------------------------------


def test_threshold_rejects_tiny_tolerance():
    with pytest.raises(DomainError):
        estimate_threshold(LatticeSpec("square", 8), 10, tol=0.001)


def test_threshold_finite_size_sanity():
    small = estimate_threshold(LatticeSpec("square", 32), 400, seed=4)
    large = estimate_threshold(LatticeSpec("square", 128), 400, seed=4)
    assert abs(small.estimate - large.estimate) < 0.02
    assert abs(large.deviation) < 0.02
    assert small.iterations > 0


def test_threshold_any_axis_on_small_lattice():
    est = estimate_threshold(LatticeSpec("triangular", 32), 200, seed=1, axis=ANY_AXIS)
    assert est.estimate == pytest.approx(THRESHOLDS[Kind.TRIANGULAR], abs=0.03)


def test_threshold_convergence_error():
    with pytest.raises(ConvergenceError):
        estimate_threshold(LatticeSpec("square", 8), 20, max_iter=2)
