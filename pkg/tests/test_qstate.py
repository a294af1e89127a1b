import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixperc.errors import DomainError, StateError
from mixperc.qstate import (
    BELL,
    CNOT,
    DensityMatrix,
    PmsParams,
    PureSchmidt,
    apply_cnot,
    apply_kraus,
    apply_unitary,
    basis_density,
    bell_measure_swap,
    fit_pms_form,
    maximally_mixed,
    measure_computational,
    partial_trace,
    pms_density,
    procrustean_filter,
    procrustean_kraus,
    pure_density,
    schmidt_weight,
    singlet_fidelity,
    tensor,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def pms(draw):
    alpha = draw(unit)
    gamma = draw(st.floats(0.0, 1.0 - alpha))
    return PmsParams(alpha, min(gamma, 1 - alpha), draw(unit))


@st.composite
def random_state(draw, qubits=2):
    d = 1 << qubits
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m))


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


# --- parameters ---------------------------------------------------------------


def test_pms_params_rejects_out_of_range():
    with pytest.raises(DomainError):
        PmsParams(0.7, 0.4, 0.5)
    with pytest.raises(DomainError):
        PmsParams(0.5, 0.0, 1.2)
    with pytest.raises(DomainError):
        PmsParams(-0.1)


def test_entanglement_criterion():
    assert PmsParams(0.5, 0.0, 0.5).entangled
    assert not PmsParams(1.0, 0.0, 1.0).entangled
    assert not PmsParams(0.5, 0.5, 1.0).entangled
    assert not PmsParams(0.5, 0.0, 0.0).entangled


def test_pms_density_examples():
    rho = pms_density(PmsParams(0.5, 0.0, 1.0))
    assert rho.is_pure()
    assert singlet_fidelity(rho) == pytest.approx(1.0, abs=1e-12)
    rho = pms_density(PmsParams(0.5, 0.0, 0.0))
    assert rho.allclose(basis_density("01"))


@given(pms())
def test_pms_density_is_valid(p):
    rho = pms_density(p)
    rho.check()
    assert rho.rank() <= 2
    assert rho.purity() == pytest.approx(p.lam**2 + (1 - p.lam) ** 2 + 2 * p.lam * (1 - p.lam) * p.gamma, abs=1e-12)


def test_density_validation():
    with pytest.raises(StateError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(StateError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(StateError):
        DensityMatrix(np.array([[0.5, 0.1], [0.3, 0.5]]))
    with pytest.raises(StateError):
        DensityMatrix(np.eye(3) / 3)


def test_json_roundtrip():
    rho = pms_density(PmsParams(0.6, 0.1, 0.9))
    again = DensityMatrix.from_json(rho.to_json())
    assert np.array_equal(rho.matrix, again.matrix)


# --- gates and measurements ---------------------------------------------------


def test_cnot_basis_action_and_involution():
    assert apply_cnot(basis_density("10"), 0, 1).allclose(basis_density("11"))
    rho = pms_density(PmsParams(0.6, 0.1, 0.7))
    big = tensor(rho, rho)
    twice = apply_cnot(apply_cnot(big, 0, 2), 0, 2)
    assert twice.allclose(big, atol=1e-14)


def test_cnot_on_nonadjacent_qubits():
    # control 0, target 2 of |100> gives |101>
    assert apply_cnot(basis_density("100"), 0, 2).allclose(basis_density("101"))
    assert apply_cnot(basis_density("001"), 2, 0).allclose(basis_density("101"))


def test_apply_unitary_rejects_nonunitary_and_bad_targets():
    with pytest.raises(StateError):
        apply_unitary(basis_density("00"), np.diag([1.0, 2.0]), [0])
    with pytest.raises(StateError):
        apply_unitary(basis_density("00"), CNOT, [0, 0])
    with pytest.raises(StateError):
        apply_unitary(basis_density("00"), CNOT, [0, 5])


@settings(max_examples=50)
@given(random_state(3), st.integers(0, 2**32 - 1))
def test_unitary_preserves_spectrum(rho, seed):
    u = random_unitary(np.random.default_rng(seed), 4)
    out = apply_unitary(rho, u, [2, 0])
    out.check()
    assert np.allclose(out.eigenvalues(), rho.eigenvalues(), atol=1e-10)


def test_measure_examples():
    tree = measure_computational(basis_density("00"), [0, 1])
    assert tree["00"].probability == 1.0
    assert tree.labels == ["00", "01", "10", "11"]
    p = PmsParams(0.6, 0.0, 0.7)
    tree = measure_computational(pms_density(p), [1])
    assert tree["1"].probability == pytest.approx(p.lam * (1 - p.alpha) + (1 - p.lam), abs=1e-14)


@settings(max_examples=50)
@given(random_state(3), st.sampled_from([[0], [2], [0, 2], [2, 1], [0, 1, 2]]))
def test_measurement_completeness(rho, targets):
    tree = measure_computational(rho, targets)
    assert len(tree) == 2 ** len(targets)
    assert tree.total_probability() == pytest.approx(1.0, abs=1e-10)
    for b in tree:
        if b.state is not None:
            b.state.check()


def test_measurement_keeps_zero_branches():
    tree = measure_computational(basis_density("01"), [0])
    assert tree["1"].probability == 0.0 and tree["1"].state is None


def test_partial_trace_of_product():
    a = pms_density(PmsParams(0.6, 0.1, 0.7))
    b = maximally_mixed(1)
    assert partial_trace(tensor(a, b), [0, 1]).allclose(a)
    assert partial_trace(tensor(a, b), [2]).allclose(b)


# --- swapping -------------------------------------------------------------------


def test_swap_on_singlets():
    phi = pure_density(BELL["phi+"])
    tree = bell_measure_swap(tensor(phi, phi), [1, 2])
    for b in tree:
        assert b.probability == pytest.approx(0.25, abs=1e-12)
        assert b.state.allclose(phi)


def test_swap_needs_four_qubits():
    with pytest.raises(StateError):
        bell_measure_swap(maximally_mixed(3), [1, 2])


@settings(max_examples=30)
@given(unit, unit)
def test_swap_on_pure_schmidt_states_is_pure(a, b):
    s = tensor(pure_density(PureSchmidt(a).vector()), pure_density(PureSchmidt(b).vector()))
    tree = bell_measure_swap(s, [1, 2])
    assert tree.total_probability() == pytest.approx(1.0, abs=1e-10)
    for br in tree:
        if br.state is not None:
            assert br.state.purity() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("alpha,lam,beta,nu", [(0.6, 0.8, 0.75, 0.9), (0.5, 0.5, 0.9, 1.0), (0.9, 0.95, 0.5, 0.95)])
def test_swap_even_branches_keep_form(alpha, lam, beta, nu):
    s = tensor(pms_density(PmsParams(alpha, 0, lam)), pms_density(PmsParams(beta, 0, nu)))
    tree = bell_measure_swap(s, [1, 2])
    assert tree.total_probability() == pytest.approx(1.0, abs=1e-10)
    for label in ("phi+", "phi-"):
        assert fit_pms_form(tree[label].state) is not None
    if lam == 1 or nu == 1:
        return
    # with both inputs mixed, odd outcomes carry two pure components and two product terms
    for label in ("psi+", "psi-"):
        assert tree[label].state.rank() == 4
        assert fit_pms_form(tree[label].state) is None


# --- filtering and fitting -----------------------------------------------------------


def test_procrustean_examples():
    assert procrustean_filter(PureSchmidt(0.5))[0] == 1.0
    assert procrustean_filter(PureSchmidt(1.0))[0] == 0.0
    assert procrustean_filter(PureSchmidt(0.75))[0] == 0.5
    assert procrustean_filter(PureSchmidt(0.75))[1].maximally_entangled


@pytest.mark.parametrize("a", np.round(np.linspace(0, 1, 11), 10))
def test_procrustean_matches_explicit_filter(a):
    ps = PureSchmidt(float(a))
    tree = apply_kraus(pure_density(ps.vector()), procrustean_kraus(ps), [0])
    expect, _ = procrustean_filter(ps)
    assert tree["0"].probability == pytest.approx(expect, abs=1e-12)
    if expect > 0:
        assert singlet_fidelity(tree["0"].state) == pytest.approx(1.0, abs=1e-12)


def test_kraus_completeness_required():
    with pytest.raises(StateError):
        apply_kraus(basis_density("0"), [np.eye(2) * 0.5], [0])


def test_singlet_fidelity_examples():
    assert singlet_fidelity(maximally_mixed(2)) == pytest.approx(0.25)
    lam = 0.8
    rho = pms_density(PmsParams(0.5, 0.0, lam))
    # overlap with phi+ is lam; overlap with psi+ is (1 - lam) / 2
    assert singlet_fidelity(rho) == pytest.approx(max(lam, (1 - lam) / 2), abs=1e-12)


def test_schmidt_weight():
    assert schmidt_weight(pure_density(PureSchmidt(0.3).vector())).a == pytest.approx(0.7)
    with pytest.raises(StateError):
        schmidt_weight(maximally_mixed(2))


@settings(max_examples=40)
@given(st.floats(0.05, 0.95), st.floats(0.2, 0.95), st.integers(0, 2**32 - 1))
def test_fit_recovers_parameters_under_local_unitaries(alpha, lam, seed):
    rng = np.random.default_rng(seed)
    u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
    rho = apply_unitary(pms_density(PmsParams(alpha, 0.0, lam)), u, [0, 1])
    fit = fit_pms_form(rho)
    assert fit is not None
    assert fit.lam == pytest.approx(lam, abs=1e-6)
    assert max(fit.alpha, 1 - fit.alpha - fit.gamma) == pytest.approx(max(alpha, 1 - alpha), abs=1e-6)


def test_fit_rejects_full_rank():
    assert fit_pms_form(maximally_mixed(2)) is None
