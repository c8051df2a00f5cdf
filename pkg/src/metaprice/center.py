"""Center best response: the budget-balance LP as an exact continuous knapsack.

Discretized on the grid, the center's program is

    min   sum_b c_b r_b                 (expected regret at truth)
    s.t.  sum_b w_b r_b >= k            (budget balance)
          0 <= r_b <= mid_b             (IR and the VCG envelope)

with ``c`` the objective-density bin masses and ``w`` the constraint-density
masses scattered to the nodes where shaded reports land.  A single linear
constraint plus box bounds is a continuous knapsack, so sorting bins by
``w_b / c_b`` and filling greedily is exactly optimal; at most one bin ends
strictly between its bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bidder import Strategy
from .distributions import DistributionSpec, cdf, mean, tabulate_pdf
from .grid import Grid, Tabulated


class InfeasibleBudgetError(RuntimeError):
    """The required collection exceeds what the envelope can raise."""


def k_vcg(f: DistributionSpec, grid: Grid) -> float:
    """Total surplus a strategyproof rule would hand out: E[psi]."""
    return mean(f, grid)


@dataclass(frozen=True)
class Budget:
    """Collection target ``k = gamma * k_vcg``."""

    gamma: float
    k_vcg: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not self.k_vcg > 0.0:
            raise ValueError("k_vcg must be positive")

    @property
    def k(self) -> float:
        return self.gamma * self.k_vcg

    @classmethod
    def from_gamma(cls, gamma: float, f: DistributionSpec, grid: Grid) -> "Budget":
        return cls(float(gamma), k_vcg(f, grid))


@dataclass(frozen=True)
class PaymentRule:
    """Payment above the critical value, tabulated per bin midpoint.

    Node values satisfy ``0 <= r_b <= mid_b`` exactly; the final payment a
    winner faces is its critical value plus ``r`` at the reported excess.
    """

    tab: Tabulated

    def __post_init__(self) -> None:
        if self.tab.kind != "rule":
            raise ValueError("payment rule must use a 'rule' tabulation")
        mids = self.tab.grid.mids
        vals = self.tab.values
        if np.any(vals < 0.0) or np.any(vals > mids):
            raise ValueError("payment rule must satisfy 0 <= r(psi) <= psi at every node")

    def __call__(self, x):
        return self.tab(x)

    @property
    def grid(self) -> Grid:
        return self.tab.grid

    @property
    def values(self) -> np.ndarray:
        return self.tab.values


def payment_rule(grid: Grid, values) -> PaymentRule:
    """Clamp tiny numerical excursions and wrap as a PaymentRule."""
    vals = np.clip(np.asarray(values, dtype=float), 0.0, grid.mids)
    return PaymentRule(Tabulated(grid, vals, "rule"))


def constraint_weights(strategy: Strategy, constraint_density: Tabulated, grid: Grid) -> np.ndarray:
    """Budget-row weights ``w`` with the constraint reading ``sum w_b r_b >= k``.

    Each bin's mass is moved to the shaded report position ``mid_b - s(mid_b)``
    and split onto the two adjacent rule nodes with linear weights.  Mass
    shifted below zero is a lost bid and contributes nothing; positions above
    the top node clamp onto it.
    """
    masses = constraint_density.bin_masses()
    mids = grid.mids
    shifted = mids - strategy.shade_at(mids)
    w = np.zeros(grid.bins)
    won = shifted >= 0.0
    pos = shifted[won]
    m = masses[won]

    below = pos <= mids[0]
    above = pos >= mids[-1]
    mid_zone = ~(below | above)
    np.add.at(w, 0, m[below].sum())
    np.add.at(w, grid.bins - 1, m[above].sum())
    if mid_zone.any():
        p = pos[mid_zone]
        mm = m[mid_zone]
        j = np.searchsorted(mids, p, side="right") - 1
        lam = (p - mids[j]) / grid.width
        np.add.at(w, j, mm * (1.0 - lam))
        np.add.at(w, j + 1, mm * lam)
    return w


def _greedy_fill(c: np.ndarray, w: np.ndarray, ub: np.ndarray, k: float, tie_break: str = "low") -> np.ndarray:
    """Exact solution of ``min c.r`` s.t. ``w.r >= k``, ``0 <= r <= ub``.

    Bins are filled in descending ``w/c`` (zero-cost collecting bins first),
    ties by bin index (``tie_break`` picks which end).  The last bin is set
    fractionally so the constraint binds with equality.
    """
    r = np.zeros_like(ub)
    if k <= 0.0:
        return r
    capacity = float(np.dot(w, ub))
    if k > capacity * (1.0 + 1e-12):
        raise InfeasibleBudgetError(
            f"budget k={k:.6g} exceeds maximum collectible {capacity:.6g} "
            f"(shortfall {k - capacity:.6g})"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w > 0.0, np.where(c > 0.0, w / c, np.inf), 0.0)
    idx = np.arange(len(ub))
    if tie_break == "low":
        order = np.lexsort((idx, -ratio))
    elif tie_break == "high":
        order = np.lexsort((-idx, -ratio))
    else:
        raise ValueError(f"unknown tie_break {tie_break!r}")

    remaining = k
    for b in order:
        if remaining <= 0.0:
            break
        if w[b] <= 0.0:
            continue
        take = min(float(ub[b]), remaining / w[b])
        r[b] = take
        remaining -= take * w[b]
    return r


def solve_center(objective_density: Tabulated, constraint_density: Tabulated,
                 strategy: Strategy, budget: Budget, grid: Grid,
                 tie_break: str = "low") -> PaymentRule:
    """Payment rule minimizing expected regret at truth subject to the budget.

    Raises :class:`InfeasibleBudgetError` when ``k`` exceeds the maximum
    collectible amount within the envelope at the given strategy.
    """
    c = objective_density.bin_masses()
    w = constraint_weights(strategy, constraint_density, grid)
    r = _greedy_fill(c, w, grid.mids, budget.k, tie_break)
    return payment_rule(grid, r)


def solve_center_ratio(f: DistributionSpec, strategy: Strategy, budget: Budget,
                       grid: Grid, tie_break: str = "low") -> PaymentRule:
    """Constant-strategy fast path: fill bins by the density-offset ratio.

    With one density on both rows the knapsack order *is* the bin-averaged
    ratio of the shifted to the unshifted density, so this solves the same
    program as :func:`solve_center` on the tabulated ``f``.
    """
    if not strategy.is_constant:
        raise ValueError("ratio method requires a constant strategy")
    ftab = tabulate_pdf(f, grid)
    return solve_center(ftab, ftab, strategy, budget, grid, tie_break)


def ratio_diagnostics(f: DistributionSpec, strategy: Strategy, grid: Grid) -> np.ndarray:
    """Per-bin mass ratio driving the fill order.

    ``rho_b = [F(hi_b + s) - F(lo_b + s)] / [F(hi_b) - F(lo_b)]`` with the
    cdf saturating at the truncation boundary; bins with zero base mass map
    to inf (collectible for free) or 0.
    """
    s = strategy.shade_at(grid.mids)
    base = np.asarray(cdf(f, grid.edges[1:]), dtype=float) - np.asarray(cdf(f, grid.edges[:-1]), dtype=float)
    shifted = (np.asarray(cdf(f, grid.edges[1:] + s), dtype=float)
               - np.asarray(cdf(f, grid.edges[:-1] + s), dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(base > 0.0, shifted / np.where(base > 0.0, base, 1.0),
                       np.where(shifted > 0.0, np.inf, 0.0))
    return rho


def collected(rule: PaymentRule, strategy: Strategy, constraint_density: Tabulated, grid: Grid) -> float:
    """Amount the budget row actually collects: ``w(strategy) . r``."""
    w = constraint_weights(strategy, constraint_density, grid)
    return float(np.dot(w, rule.values))
