"""Pairwise distillation with recycling of the ``00`` failure branch."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from ..errors import DomainError
from .formulas import clamp_prob


@dataclass(frozen=True)
class RecycleState:
    alpha_k: float
    lam_k: float
    k: int = 0

    def __post_init__(self):
        for name in ("alpha_k", "lam_k"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name}={v!r} outside [0, 1]")
        if self.k < 0:
            raise DomainError("round index must be nonnegative")


@dataclass(frozen=True)
class StepProbs:
    """Outcome probabilities of one PCM on two identical states."""

    p_succ: float
    c: float
    f: float


def recycle_step(s: RecycleState) -> tuple:
    """One PCM round on ``rho(alpha_k, lam_k)`` pairs.

    Returns the state produced by the ``00`` outcome together with the
    probabilities of a singlet, of that recycled state and of a hard failure.
    """
    a, l = s.alpha_k, s.lam_k
    norm_a = 1 - 2 * a + 2 * a * a
    c = 1 - 2 * l + 2 * (1 - a + a * a) * l * l
    probs = StepProbs(
        p_succ=clamp_prob(2 * l * l * a * (1 - a)),
        c=clamp_prob(c),
        f=clamp_prob(2 * l * (1 - l)),
    )
    nxt = RecycleState(
        alpha_k=min(1.0, a * a / norm_a),
        lam_k=min(1.0, l * l * norm_a / c),
        k=s.k + 1,
    )
    return nxt, probs


def recycling_failure(n: int, s: RecycleState) -> float:
    """Probability that recycling on ``n`` copies of ``s`` never yields a singlet.

    Each round pairs up ``n // 2`` states; an odd leftover is discarded.
    """
    if int(n) != n or n < 0:
        raise DomainError(f"number of states must be a nonnegative integer, got {n!r}")

    levels = [s]

    def level(i: int) -> tuple:
        while len(levels) <= i + 1:
            levels.append(recycle_step(levels[-1])[0])
        return recycle_step(levels[i])[1]

    @lru_cache(maxsize=None)
    def fail(m: int, i: int) -> float:
        pairs = m // 2
        if pairs == 0:
            return 1.0
        probs = level(i)
        return sum(
            math.comb(pairs, k) * probs.f ** (pairs - k) * probs.c**k * fail(k, i + 1)
            for k in range(pairs + 1)
        )

    return clamp_prob(fail(int(n), 0))


def scp_recycling(n: int, alpha: float, lam: float) -> float:
    return clamp_prob(1 - recycling_failure(n, RecycleState(alpha, lam)))
