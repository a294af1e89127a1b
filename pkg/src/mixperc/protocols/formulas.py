"""
Closed-form singlet conversion probabilities.

All 1D and square-network formulas assume ``gamma = delta = 0``; for other
values use the exact branch enumeration in :mod:`mixperc.protocols.branches`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..errors import DomainError
from ..qstate import PmsParams, PureSchmidt

NEG_CLAMP = 1e-12


def clamp_prob(p: float) -> float:
    """Clip rounding noise into [0, 1]; anything worse is a bug."""
    if p < -NEG_CLAMP or p > 1 + NEG_CLAMP or math.isnan(p):
        raise DomainError(f"probability {p!r} outside [0, 1]")
    return min(1.0, max(0.0, p))


def _unit(name: str, v: float) -> float:
    v = float(v)
    if not (0.0 <= v <= 1.0):
        raise DomainError(f"{name}={v!r} outside [0, 1]")
    return v


def scp_pair(first: PmsParams, second: PmsParams) -> float:
    """Probability of distilling one singlet from two mixed states (PCM + Procrustean)."""
    a, g, l = first.alpha, first.gamma, first.lam
    b, d, n = second.alpha, second.gamma, second.lam
    return clamp_prob(2 * l * n * min(a * (1 - b - d), b * (1 - a - g)))


def scp_distillable_subspace(n: int, alpha: float, lam: float) -> float:
    """Success probability of the distillable-subspace protocol on ``n`` identical edges."""
    if int(n) != n or n < 2:
        raise DomainError(f"distillable-subspace protocol needs n >= 2, got {n!r}")
    n = int(n)
    alpha, lam = _unit("alpha", alpha), _unit("lam", lam)
    alpha = max(alpha, 1 - alpha)
    total = 0.0
    for l in range(n + 1):
        m = n - l
        inner = 0.0
        for k in range(1, m):
            ratio = Fraction(math.comb(m, k) * (math.comb(m, k) - 1), math.comb(n, k) - 1)
            inner += alpha ** (m - k) * (1 - alpha) ** k * float(ratio)
        if inner:
            total += lam**m * (1 - lam) ** l * math.comb(n, l) * inner
    return clamp_prob(total)


def _check(alpha, lam, beta, nu) -> None:
    for name, v in (("alpha", alpha), ("lam", lam), ("beta", beta), ("nu", nu)):
        _unit(name, v)


def _overlaps(alpha: float, beta: float) -> tuple:
    x, y = alpha * (1 - beta), beta * (1 - alpha)
    return min(x, y), max(x, y)


def scp_cep_1d(alpha: float, lam: float, beta: float, nu: float) -> float:
    """Two bonds in series, each distilled independently."""
    _check(alpha, lam, beta, nu)
    m, _ = _overlaps(alpha, beta)
    return clamp_prob((2 * lam * nu * m) ** 2)


def scp_hybrid_1d(alpha: float, lam: float, beta: float, nu: float) -> float:
    """PCM on each bond, swap the two pure states, then Procrustean filtering."""
    _check(alpha, lam, beta, nu)
    m, _ = _overlaps(alpha, beta)
    return clamp_prob(2 * lam**2 * nu**2 * (alpha + beta - 2 * alpha * beta) * m)


def scp_direct_1d(alpha: float, lam: float, beta: float, nu: float) -> float:
    """Swap mixed states across the middle node first, then distill the two results."""
    _check(alpha, lam, beta, nu)
    return clamp_prob(2 * lam**2 * nu**2 * alpha * beta * (1 - alpha) * (1 - beta))


@dataclass(frozen=True)
class SquareParams:
    alpha_hat: float
    p_c: float
    alpha_tilde: float
    degenerate: bool = False


def xz_swap_weight(alpha_hat: float) -> float:
    """Schmidt weight left after XZ-swapping two pairs of ``|alpha_hat>`` states."""
    rad = 1 - 16 * alpha_hat**2 * (1 - alpha_hat) ** 2
    return (1 + math.sqrt(max(0.0, rad))) / 2


def square_params(alpha: float, lam: float, beta: float, nu: float) -> SquareParams:
    _check(alpha, lam, beta, nu)
    denom = alpha + beta - 2 * alpha * beta
    if denom <= 0:
        return SquareParams(1.0, 0.0, 1.0, degenerate=True)
    _, big = _overlaps(alpha, beta)
    a_hat = min(1.0, max(0.5, big / denom))  # exact value lies in [1/2, 1]
    return SquareParams(a_hat, lam * nu * denom, xz_swap_weight(a_hat))


def majorization_pair_scp(a: PureSchmidt) -> float:
    """Singlet probability from the two ``|a>`` states produced by XZ-swapping."""
    w = max(a.a, 1 - a.a)
    return clamp_prob(min(1.0, 2 * (1 - w**2)))


def scp_square(alpha: float, lam: float, beta: float, nu: float) -> float:
    sq = square_params(alpha, lam, beta, nu)
    if sq.degenerate:
        return 0.0
    pc2 = sq.p_c**2
    return clamp_prob(
        4 * pc2 * (1 - pc2) * (1 - sq.alpha_hat)
        + pc2**2 * majorization_pair_scp(PureSchmidt(sq.alpha_tilde))
    )


def scp_cep_square(alpha: float, lam: float, beta: float, nu: float) -> float:
    """Opposite corners of a square joined by either of two CEP paths."""
    p = scp_cep_1d(alpha, lam, beta, nu)
    return clamp_prob(1 - (1 - p) ** 2)

