"""
Cross-validation of the closed-form probabilities against exact branch
enumeration on density matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .protocols import branches, formulas, recycling
from .qstate import PmsParams, pms_density

DEFAULT_GRID = {
    "alpha": (0.5, 0.6, 0.75, 0.9),
    "beta": (0.5, 0.6, 0.75, 0.9),
    "lam": (0.5, 0.8, 1.0),
    "nu": (0.5, 0.8, 1.0),
    "gamma": (0.0, 0.1),
}
RECYCLING_SIZES = (2, 3, 4, 5, 6)

FORMULAS = {
    "scp_pair": formulas.scp_pair,
    "recycle_step": recycling.recycle_step,
    "scp_direct_1d": formulas.scp_direct_1d,
    "scp_hybrid_1d": formulas.scp_hybrid_1d,
    "scp_recycling": recycling.scp_recycling,
}


@dataclass
class CaseResult:
    name: str
    max_deviation: float
    tolerance: float
    cases: int
    worst: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: max deviation {self.max_deviation:.3e} "
            f"(tol {self.tolerance:.0e}, {self.cases} cases, worst at {self.worst})"
        )


class _Tracker:
    def __init__(self, name, tol):
        self.res = CaseResult(name, 0.0, tol, 0)

    def see(self, dev, **where):
        self.res.cases += 1
        if dev > self.res.max_deviation or not self.res.worst:
            self.res.max_deviation = max(self.res.max_deviation, float(dev))
            self.res.worst = where


def run_verification(
    grid: Optional[dict] = None,
    tol: float = 1e-10,
    overrides: Optional[dict] = None,
    recycling_sizes=RECYCLING_SIZES,
) -> list:
    """Run every oracle comparison and return one :class:`CaseResult` per check.

    ``overrides`` replaces entries of :data:`FORMULAS` (used to confirm that
    a wrong formula is caught).
    """
    grid = {**DEFAULT_GRID, **(grid or {})}
    if any(len(v) == 0 for v in grid.values()):
        raise DomainError("verification grid has an empty axis")
    f: dict = {**FORMULAS, **(overrides or {})}
    alphas, betas, lams, nus, gammas = (grid[k] for k in ("alpha", "beta", "lam", "nu", "gamma"))

    pair = _Tracker("pcm_pair_vs_closed_form", tol)
    for a, b, l, n, g in itertools.product(alphas, betas, lams, nus, gammas):
        first, second = PmsParams(a, g, l), PmsParams(b, g, n)
        pair.see(
            abs(branches.distill_pair(first, second) - f["scp_pair"](first, second)),
            alpha=a, beta=b, lam=l, nu=n, gamma=g,
        )

    recycled = _Tracker("pcm_00_branch_vs_recycled_state", tol)
    hard = _Tracker("pcm_mixed_branches_vs_hard_failure", tol)
    for a, l in itertools.product(alphas, lams):
        tree = branches.pcm_branches(PmsParams(a, 0, l), PmsParams(a, 0, l))
        nxt, probs = f["recycle_step"](recycling.RecycleState(a, l))
        b00 = tree["00"]
        dev = abs(b00.probability - probs.c)
        if b00.state is not None:
            expect = pms_density(PmsParams(nxt.alpha_k, 0, nxt.lam_k)).matrix
            dev = max(dev, float(np.max(np.abs(b00.state.matrix - expect))))
        recycled.see(dev, alpha=a, lam=l)
        hard.see(abs(tree.probability("01", "10") - probs.f), alpha=a, lam=l)

    direct = _Tracker("direct_swap_vs_closed_form", tol)
    hybrid = _Tracker("hybrid_swap_vs_closed_form", tol)
    for a, b, l, n in itertools.product(alphas, betas, lams, nus):
        direct.see(abs(branches.direct_swap_success(a, l, b, n) - f["scp_direct_1d"](a, l, b, n)),
                   alpha=a, beta=b, lam=l, nu=n)
        hybrid.see(abs(branches.hybrid_swap_success(a, l, b, n) - f["scp_hybrid_1d"](a, l, b, n)),
                   alpha=a, beta=b, lam=l, nu=n)

    rec = _Tracker("recycling_tree_vs_recursion", tol)
    for size, a, l in itertools.product(recycling_sizes, alphas[:2], lams):
        brute = branches.recycling_success_bruteforce(size, PmsParams(a, 0, l))
        rec.see(abs(brute - f["scp_recycling"](size, a, l)), n=size, alpha=a, lam=l)

    return [t.res for t in (pair, recycled, hard, direct, hybrid, rec)]


def all_passed(results) -> bool:
    return all(r.passed for r in results)


def perturbed(fn: Callable, eps: float = 1e-6) -> Callable:
    """Wrap a formula so its result is off by ``eps`` (negative control)."""
    return lambda *args: fn(*args) + eps
