"""
Exact density-matrix algebra on a handful of qubits.

Everything here is dense linear algebra on matrices of dimension at most
``2**MAX_QUBITS``. It serves as the ground truth against which the closed-form
success probabilities in :mod:`mixperc.protocols` are checked, so nothing is
sampled: measurements return every outcome with its exact probability.

Qubit ordering: qubit 0 is the leftmost tensor factor, and the basis label
``"01"`` means qubit 0 in ``|0>`` and qubit 1 in ``|1>``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import DomainError, StateError

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PROB = 1e-10
TOL_PSD = 1e-9
TOL_UNITARY = 1e-10
MAX_QUBITS = 10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

_S = 1 / np.sqrt(2)
BELL = {
    "phi+": np.array([_S, 0, 0, _S], dtype=complex),
    "phi-": np.array([_S, 0, 0, -_S], dtype=complex),
    "psi+": np.array([0, _S, _S, 0], dtype=complex),
    "psi-": np.array([0, _S, -_S, 0], dtype=complex),
}
# Pauli applied to the far outer qubit that maps each swap outcome onto phi+.
BELL_CORRECTION = {"phi+": I2, "phi-": Z, "psi+": X, "psi-": X @ Z}


@dataclass(frozen=True)
class PmsParams:
    """Parameters ``(alpha, gamma, lam)`` of a purifiable mixed state.

    The state is ``lam |psi><psi| + (1 - lam) |01><01|`` with
    ``|psi> = sqrt(alpha)|00> + sqrt(gamma)|01> + sqrt(1 - alpha - gamma)|11>``.
    """

    alpha: float
    gamma: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "gamma", "lam"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                raise DomainError(f"{name}={v!r} outside [0, 1]")
        if self.alpha + self.gamma > 1.0 + 1e-12:
            raise DomainError(
                f"alpha + gamma = {self.alpha + self.gamma!r} exceeds 1"
            )

    @property
    def weight_11(self) -> float:
        return max(0.0, 1.0 - self.alpha - self.gamma)

    @property
    def entangled(self) -> bool:
        return self.lam > 0 and self.alpha > 0 and self.alpha + self.gamma < 1


@dataclass(frozen=True)
class PureSchmidt:
    """Pure state ``sqrt(a)|00> + sqrt(1 - a)|11>``."""

    a: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and 0.0 <= self.a <= 1.0):
            raise DomainError(f"Schmidt weight a={self.a!r} outside [0, 1]")

    @property
    def maximally_entangled(self) -> bool:
        return abs(self.a - 0.5) < 1e-12

    def vector(self) -> np.ndarray:
        return np.array([np.sqrt(self.a), 0, 0, np.sqrt(1 - self.a)], dtype=complex)


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over ``num_qubits``."""

    __slots__ = ("matrix", "num_qubits")

    def __init__(self, matrix, validate: bool = True):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateError(f"expected a square matrix, got shape {m.shape}")
        dim = m.shape[0]
        k = dim.bit_length() - 1
        if dim < 2 or 1 << k != dim:
            raise StateError(f"dimension {dim} is not a power of two >= 2")
        if k > MAX_QUBITS:
            raise StateError(f"{k} qubits exceeds the {MAX_QUBITS}-qubit limit")
        self.matrix = m
        self.num_qubits = k
        if validate:
            self.check()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check(self) -> None:
        m = self.matrix
        herm = np.max(np.abs(m - m.conj().T))
        if herm > TOL_HERM:
            raise StateError(f"not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1) > TOL_TRACE:
            raise StateError(f"trace {tr!r} differs from 1")
        low = np.linalg.eigvalsh(m).min()
        if low < -TOL_PSD:
            raise StateError(f"negative eigenvalue {low:.3e}")

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def rank(self, tol: float = TOL_PSD) -> int:
        return int(np.sum(self.eigenvalues() > tol))

    def is_pure(self, tol: float = 1e-10) -> bool:
        return abs(self.purity() - 1) < tol

    def allclose(self, other: "DensityMatrix", atol: float = 1e-10) -> bool:
        return self.matrix.shape == other.matrix.shape and np.allclose(
            self.matrix, other.matrix, atol=atol, rtol=0
        )

    def to_json(self) -> dict:
        """Row-major dump with complex entries as ``[re, im]`` pairs."""
        return {
            "num_qubits": self.num_qubits,
            "matrix": [[[z.real, z.imag] for z in row] for row in self.matrix],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DensityMatrix":
        m = np.array(data["matrix"], dtype=float)
        rho = cls(m[..., 0] + 1j * m[..., 1])
        if rho.num_qubits != data["num_qubits"]:
            raise StateError("num_qubits does not match the matrix dimension")
        return rho

    def __repr__(self):
        return f"DensityMatrix(num_qubits={self.num_qubits})"


@dataclass
class Branch:
    label: str
    probability: float
    state: Optional[DensityMatrix]


@dataclass
class BranchTree:
    """All outcomes of a measurement, with exact probabilities.

    Zero-probability outcomes stay in the list (with ``state=None``) so that
    positions are stable across parameter values.
    """

    branches: list = field(default_factory=list)

    def __iter__(self) -> Iterator[Branch]:
        return iter(self.branches)

    def __len__(self):
        return len(self.branches)

    def __getitem__(self, label: str) -> Branch:
        for b in self.branches:
            if b.label == label:
                return b
        raise KeyError(label)

    @property
    def labels(self) -> list:
        return [b.label for b in self.branches]

    def probability(self, *labels: str) -> float:
        return sum(self[lab].probability for lab in labels)

    def total_probability(self) -> float:
        return sum(b.probability for b in self.branches)


def pure_density(vec) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def basis_density(bits: str) -> DensityMatrix:
    """Projector onto the computational basis state labelled ``bits``."""
    v = np.zeros(1 << len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return DensityMatrix(np.outer(v, v))


def maximally_mixed(num_qubits: int) -> DensityMatrix:
    d = 1 << num_qubits
    return DensityMatrix(np.eye(d, dtype=complex) / d)


def pms_density(p: PmsParams) -> DensityMatrix:
    """Two-qubit density matrix of the mixed state parameterized by ``p``."""
    psi = np.array(
        [np.sqrt(p.alpha), np.sqrt(p.gamma), 0, np.sqrt(p.weight_11)], dtype=complex
    )
    m = p.lam * np.outer(psi, psi)
    m[1, 1] += 1 - p.lam
    return DensityMatrix(m)


def tensor(*states: DensityMatrix) -> DensityMatrix:
    if not states:
        raise StateError("tensor() needs at least one state")
    m = states[0].matrix
    for s in states[1:]:
        m = np.kron(m, s.matrix)
    return DensityMatrix(m, validate=False)


def _check_targets(targets: Sequence[int], num_qubits: int) -> list:
    t = [int(q) for q in targets]
    if len(set(t)) != len(t):
        raise StateError(f"repeated target qubits {t}")
    if any(q < 0 or q >= num_qubits for q in t):
        raise StateError(f"targets {t} out of range for {num_qubits} qubits")
    return t


def _as_tensor(s: DensityMatrix) -> np.ndarray:
    return s.matrix.reshape((2,) * (2 * s.num_qubits))


def _apply_axes(t: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Left-multiply ``op`` onto the tensor legs ``axes`` (in that order)."""
    front = list(range(len(axes)))
    t = np.moveaxis(t, axes, front)
    shape = t.shape
    out = (op @ t.reshape(op.shape[1], -1)).reshape(shape)
    return np.moveaxis(out, front, axes)


def apply_unitary(
    s: DensityMatrix, u, targets: Sequence[int]
) -> DensityMatrix:
    """Conjugate ``s`` by ``u`` acting on the qubits ``targets``."""
    t = _check_targets(targets, s.num_qubits)
    u = np.asarray(u, dtype=complex)
    if u.shape != (1 << len(t), 1 << len(t)):
        raise StateError(f"unitary of shape {u.shape} does not act on {len(t)} qubits")
    dev = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
    if dev > TOL_UNITARY:
        raise StateError(f"matrix is not unitary (deviation {dev:.3e})")
    k = s.num_qubits
    r = _apply_axes(_as_tensor(s), u, t)
    r = _apply_axes(r, u.conj(), [q + k for q in t])
    return DensityMatrix(r.reshape(s.dim, s.dim), validate=False)


def apply_cnot(s: DensityMatrix, control: int, target: int) -> DensityMatrix:
    return apply_unitary(s, CNOT, [control, target])


def partial_trace(s: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    keep = _check_targets(keep, s.num_qubits)
    k = s.num_qubits
    gone = [q for q in range(k) if q not in keep]
    t = _as_tensor(s)
    # bring kept row legs, traced row legs, kept column legs, traced column legs
    order = keep + gone + [q + k for q in keep] + [q + k for q in gone]
    t = np.transpose(t, order)
    dk, dg = 1 << len(keep), 1 << len(gone)
    t = t.reshape(dk, dg, dk, dg)
    return DensityMatrix(np.einsum("ajbj->ab", t), validate=False)


def _normalized(m: np.ndarray, prob: float) -> Optional[DensityMatrix]:
    if prob <= TOL_PROB:
        return None
    m = m / prob
    m = (m + m.conj().T) / 2
    return DensityMatrix(m, validate=False)


def measure_computational(s: DensityMatrix, targets: Sequence[int]) -> BranchTree:
    """Projective measurement of ``targets`` in the computational basis.

    Branch labels list the outcome bits in the order of ``targets``; branch
    states live on the unmeasured qubits, in their original order.
    """
    t = _check_targets(targets, s.num_qubits)
    k = s.num_qubits
    rest = [q for q in range(k) if q not in t]
    tens = _as_tensor(s)
    order = t + rest + [q + k for q in t] + [q + k for q in rest]
    tens = np.transpose(tens, order)
    dt, dr = 1 << len(t), 1 << len(rest)
    tens = tens.reshape(dt, dr, dt, dr)
    tree = BranchTree()
    for idx, bits in enumerate(itertools.product("01", repeat=len(t))):
        block = tens[idx, :, idx, :]
        prob = max(0.0, float(np.trace(block).real))
        state = _normalized(block, prob) if rest else None
        if prob <= TOL_PROB:
            prob = 0.0
        tree.branches.append(Branch("".join(bits), prob, state))
    return tree


def bell_measure_swap(
    s: DensityMatrix, mid: Sequence[int], correct: Optional[int] = None
) -> BranchTree:
    """Bell measurement on the two ``mid`` qubits (entanglement swapping).

    Each branch state lives on the remaining qubits. The outcome-dependent
    Pauli correction is applied to qubit ``correct`` (an index among the
    remaining qubits, default the last one) so that two ``phi+`` inputs give
    ``phi+`` on every branch.
    """
    if s.num_qubits < 4:
        raise StateError("entanglement swapping needs at least 4 qubits")
    m = _check_targets(mid, s.num_qubits)
    if len(m) != 2:
        raise StateError("mid must name exactly two qubits")
    k = s.num_qubits
    rest = [q for q in range(k) if q not in m]
    fix = len(rest) - 1 if correct is None else int(correct)
    tens = _as_tensor(s)
    order = m + rest + [q + k for q in m] + [q + k for q in rest]
    tens = np.transpose(tens, order)
    dr = 1 << len(rest)
    tens = tens.reshape(4, dr, 4, dr)
    tree = BranchTree()
    for label, vec in BELL.items():
        block = np.einsum("i,iajb,j->ab", vec.conj(), tens, vec)
        prob = max(0.0, float(np.trace(block).real))
        state = _normalized(block, prob)
        if state is None:
            prob = 0.0
        elif label != "phi+":
            state = apply_unitary(state, BELL_CORRECTION[label], [fix])
        tree.branches.append(Branch(label, prob, state))
    return tree


def apply_kraus(
    s: DensityMatrix, ops: Sequence[np.ndarray], targets: Sequence[int]
) -> BranchTree:
    """Generalized measurement with Kraus operators acting on ``targets``.

    Branch ``"i"`` holds the normalized state after operator ``ops[i]``.
    """
    t = _check_targets(targets, s.num_qubits)
    ops = [np.asarray(o, dtype=complex) for o in ops]
    total = sum(o.conj().T @ o for o in ops)
    if np.max(np.abs(total - np.eye(total.shape[0]))) > TOL_UNITARY:
        raise StateError("Kraus operators are not complete")
    k = s.num_qubits
    tree = BranchTree()
    for i, o in enumerate(ops):
        r = _apply_axes(_as_tensor(s), o, t)
        r = _apply_axes(r, o.conj(), [q + k for q in t]).reshape(s.dim, s.dim)
        prob = max(0.0, float(np.trace(r).real))
        state = _normalized(r, prob)
        tree.branches.append(Branch(str(i), prob if state else 0.0, state))
    return tree


def procrustean_filter(a: PureSchmidt) -> tuple:
    """Local filtering of ``|a>`` into a singlet: ``(probability, PureSchmidt(0.5))``."""
    return 2 * min(a.a, 1 - a.a), PureSchmidt(0.5)


def procrustean_kraus(a: PureSchmidt) -> list:
    """Two-outcome local filter on qubit 0 realizing the Procrustean method.

    Outcome 0 damps the larger Schmidt component down to the smaller one.
    """
    big, small = max(a.a, 1 - a.a), min(a.a, 1 - a.a)
    ratio = np.sqrt(small / big) if big > 0 else 0.0
    k0 = np.diag([ratio, 1.0]) if a.a >= 0.5 else np.diag([1.0, ratio])
    k1 = np.diag(np.sqrt(1 - np.diag(k0) ** 2))
    return [k0.astype(complex), k1.astype(complex)]


def singlet_fidelity(s: DensityMatrix) -> float:
    """Largest overlap of a two-qubit state with any of the four Bell states."""
    if s.num_qubits != 2:
        raise StateError("singlet fidelity is defined for two qubits")
    return max(float(np.real(v.conj() @ s.matrix @ v)) for v in BELL.values())


def schmidt_weight(s: DensityMatrix, tol: float = 1e-10) -> PureSchmidt:
    """Larger Schmidt weight of a pure two-qubit state."""
    if s.num_qubits != 2 or not s.is_pure(tol):
        raise StateError("schmidt_weight expects a pure two-qubit state")
    w, v = np.linalg.eigh(s.matrix)
    sv = np.linalg.svd(v[:, -1].reshape(2, 2), compute_uv=False)
    return PureSchmidt(float(min(1.0, sv[0] ** 2)))


def _perp(v: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(v[1]), np.conj(v[0])])


def fit_pms_form(s: DensityMatrix, tol: float = TOL_PSD) -> Optional[PmsParams]:
    """Find ``(alpha, gamma, lam)`` with ``s`` locally equivalent to that state.

    Returns ``None`` when no such parameters exist. A rank-2 state qualifies
    iff its range contains a product vector ``a (x) b`` whose "opposite"
    vector ``a_perp (x) b_perp`` lies in the kernel; that product vector
    plays the role of ``|01>``.
    """
    if s.num_qubits != 2:
        raise StateError("fit_pms_form expects a two-qubit state")
    w, v = np.linalg.eigh(s.matrix)
    keep = w > tol
    r = int(keep.sum())
    if r == 0 or r > 2:
        return None
    if r == 1:
        sv = np.linalg.svd(v[:, -1].reshape(2, 2), compute_uv=False)
        return PmsParams(float(min(1.0, sv[0] ** 2)), 0.0, 1.0)

    v1, v2 = v[:, keep].T
    m1, m2 = v1.reshape(2, 2), v2.reshape(2, 2)
    # det(x m1 + y m2) = qa x^2 + qb x y + qc y^2
    qa, qc = np.linalg.det(m1), np.linalg.det(m2)
    qb = m1[0, 0] * m2[1, 1] + m1[1, 1] * m2[0, 0] - m1[0, 1] * m2[1, 0] - m1[1, 0] * m2[0, 1]
    scale = 1e-8
    if max(abs(qa), abs(qb), abs(qc)) < scale:
        candidates = [v1, v2]
    else:
        candidates = [x * v1 + v2 for x in np.roots([qa, qb, qc])]
        if abs(qa) < scale:
            candidates.append(v1)

    pinv = (v[:, keep] / w[keep]) @ v[:, keep].conj().T
    for e in candidates:
        e = e / np.linalg.norm(e)
        u, sv, vh = np.linalg.svd(e.reshape(2, 2))
        if sv[1] > 1e-6:
            continue
        a, b = u[:, 0], vh[0, :]
        opp = np.kron(_perp(a), _perp(b))
        if abs(np.real(opp.conj() @ s.matrix @ opp)) > 1e-8:
            continue
        e = np.kron(a, b)
        mu = 1.0 / float(np.real(e.conj() @ pinv @ e))
        rest = s.matrix - mu * np.outer(e, e.conj())
        lam = float(np.real(np.trace(rest)))
        if lam <= tol:
            continue
        rw, rv = np.linalg.eigh(rest / lam)
        psi = rv[:, -1]
        c00 = abs(np.kron(a, _perp(b)).conj() @ psi) ** 2
        c01 = abs(e.conj() @ psi) ** 2
        c00, c01 = float(min(1.0, c00)), float(min(1.0 - c00, c01))
        return PmsParams(c00, c01, float(min(1.0, lam)))
    return None
