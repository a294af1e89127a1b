"""
Protocols carried out on explicit density matrices.

These functions never use the closed forms: every probability is a trace
over an exactly enumerated measurement branch. They are slow (dense 16x16
matrices) and exist to check :mod:`mixperc.protocols.formulas`.

Qubit layout for two-edge protocols: ``rho1`` on qubits (0, 1), ``rho2`` on
(2, 3); qubits 0 and 2 sit in one node, 1 and 3 in the other.
"""

from __future__ import annotations

import itertools
from typing import Union

import numpy as np

from ..errors import StateError
from ..qstate import (
    BranchTree,
    DensityMatrix,
    PmsParams,
    PureSchmidt,
    apply_cnot,
    apply_kraus,
    bell_measure_swap,
    measure_computational,
    apply_unitary,
    pms_density,
    procrustean_kraus,
    singlet_fidelity,
    tensor,
)

StateLike = Union[PmsParams, DensityMatrix]
EVEN_PARITY = ("phi+", "phi-")


def _density(s: StateLike) -> DensityMatrix:
    return pms_density(s) if isinstance(s, PmsParams) else s


def pcm_branches(first: StateLike, second: StateLike) -> BranchTree:
    """C-NOT inside each node, then measure the two qubits of ``second``.

    Branch labels are ``<node-A bit><node-B bit>``; branch ``"11"`` holds a
    pure state whenever both inputs are of the mixed-state family.
    """
    s = tensor(_density(first), _density(second))
    s = apply_cnot(s, 0, 2)
    s = apply_cnot(s, 1, 3)
    return measure_computational(s, [2, 3])


def procrustean_success(s: DensityMatrix) -> float:
    """Probability of filtering a pure two-qubit state into a singlet.

    The state is rotated into Schmidt form by local unitaries and the
    two-outcome local filter is applied as an explicit measurement.
    """
    if not s.is_pure(1e-9):
        raise StateError("Procrustean filtering needs a pure state")
    psi = np.linalg.eigh(s.matrix)[1][:, -1]
    u, sv, vh = np.linalg.svd(psi.reshape(2, 2))
    s = apply_unitary(s, np.kron(u.conj().T, vh.conj()), [0, 1])
    a = PureSchmidt(float(min(1.0, sv[0] ** 2)))
    if a.a >= 1 - 1e-15:
        return 0.0
    ok = apply_kraus(s, procrustean_kraus(a), [0])["0"]
    if ok.state is None:
        return 0.0
    if singlet_fidelity(ok.state) < 1 - 1e-9:
        raise StateError("local filter did not produce a singlet")
    return ok.probability


def distill_pair(first: StateLike, second: StateLike) -> float:
    """Singlet probability of PCM followed by Procrustean filtering.

    A mixed ``"11"`` branch contributes nothing: no single-copy local
    filter turns a mixed state into a perfect singlet.
    """
    b = pcm_branches(first, second)["11"]
    if b.state is None or not b.state.is_pure(1e-9):
        return 0.0
    return b.probability * procrustean_success(b.state)


def recycling_success_bruteforce(n: int, state: StateLike) -> float:
    """Recycling success probability by enumerating every outcome sequence.

    States are paired in order each round (an odd leftover is dropped); each
    pair's outcome is singlet, recycled state (``"00"``) or hard failure.
    All ``3**pairs`` joint outcomes of a round are enumerated explicitly.
    """
    rho = _density(state)

    def run(states: list) -> float:
        pairs = [(states[i], states[i + 1]) for i in range(0, len(states) - 1, 2)]
        if not pairs:
            return 0.0
        per_pair = []
        for x, y in pairs:
            tree = pcm_branches(x, y)
            win = distill_pair(x, y)
            recycled = tree["00"]
            lose = tree.probability("01", "10") + tree["11"].probability - win
            per_pair.append(
                [("win", win, None), ("pms", recycled.probability, recycled.state), ("fail", lose, None)]
            )
        total = 0.0
        for combo in itertools.product(*per_pair):
            weight = 1.0
            for _, p, _ in combo:
                weight *= p
            if weight == 0.0:
                continue
            if any(kind == "win" for kind, _, _ in combo):
                total += weight
            else:
                total += weight * run([st for kind, _, st in combo if kind == "pms"])
        return total

    return run([rho] * int(n))


def direct_swap_success(alpha: float, lam: float, beta: float, nu: float) -> float:
    """Direct swapping across a middle node, done on explicit states.

    Each of the two A-B / B-C edge pairings is swapped by a Bell measurement;
    only the even-parity outcomes yield states of the mixed-state family
    (the odd ones have rank 4 when ``lam, nu < 1``), and those two outputs are
    then distilled by PCM and Procrustean filtering.
    """
    ra, rb = pms_density(PmsParams(alpha, 0, lam)), pms_density(PmsParams(beta, 0, nu))
    left = bell_measure_swap(tensor(ra, rb), [1, 2])
    right = bell_measure_swap(tensor(rb, ra), [1, 2])
    total = 0.0
    for i in EVEN_PARITY:
        for j in EVEN_PARITY:
            bi, bj = left[i], right[j]
            if bi.probability and bj.probability:
                total += bi.probability * bj.probability * distill_pair(bi.state, bj.state)
    return total


def hybrid_swap_success(alpha: float, lam: float, beta: float, nu: float) -> float:
    """PCM on both bonds, swap the two pure states, filter every Bell outcome."""
    ab = pcm_branches(PmsParams(alpha, 0, lam), PmsParams(beta, 0, nu))["11"]
    if ab.state is None:
        return 0.0
    swapped = bell_measure_swap(tensor(ab.state, ab.state), [1, 2])
    return ab.probability**2 * sum(
        b.probability * procrustean_success(b.state) for b in swapped if b.state is not None
    )
