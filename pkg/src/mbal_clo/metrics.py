"""Risk evaluation against the known true model, near-degeneracy diagnostics,
and supervised-vs-active comparison tables."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .datagen import PricingScenario, Scenario
from .losses import SPO, surrogate_values
from .mbal import TrialTrace
from .polytope import Polytope, distance_to_degeneracy_many


def excess_spo_risk(h, poly: Polytope, test_xs: np.ndarray, true_model) -> float:
    """Mean decision regret of h's plans, priced by the true conditional mean.

    Both h and true_model need a predict_many(X) -> (n, d) method. The result
    is >= 0 because the true mean's own plan is optimal for it.
    """
    test_xs = np.atleast_2d(np.asarray(test_xs, dtype=float))
    if test_xs.shape[0] == 0:
        raise ValueError("test set must be nonempty")
    true_means = true_model.predict_many(test_xs)
    c_hat = h.predict_many(test_xs)
    return float(np.mean(surrogate_values(SPO, poly, c_hat, true_means)))


@dataclass(frozen=True)
class PsiEstimate:
    """Empirical near-degeneracy profile: fraction of draws with distance <= b.

    kappa_hat and b0_hat come from a least-squares fit of log(psi) against
    log(b) over grid points with psi strictly inside (0, 1); both are None
    when fewer than two points qualify. proxy flags profiles computed against
    a conditional mean that the hypothesis class cannot represent.
    """

    b_grid: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    kappa_hat: float | None
    b0_hat: float | None
    M: int
    proxy: bool = False


def psi_from_costs(poly: Polytope, costs: np.ndarray, b_grid: np.ndarray, *, proxy: bool = False) -> PsiEstimate:
    """Profile the degeneracy distances of given cost vectors over a b grid."""
    b_grid = np.asarray(b_grid, dtype=float)
    if b_grid.ndim != 1 or b_grid.size == 0:
        raise ValueError("b_grid must be a nonempty 1-D array")
    if np.any(np.diff(b_grid) < 0):
        raise ValueError("b_grid must be ascending")
    costs = np.atleast_2d(np.asarray(costs, dtype=float))
    nus = np.sort(distance_to_degeneracy_many(poly, costs))
    psi = np.searchsorted(nus, b_grid, side="right") / len(nus)

    kappa_hat = b0_hat = None
    usable = (psi > 0) & (psi < 1) & (b_grid > 0)
    if usable.sum() >= 2 and len(np.unique(b_grid[usable])) >= 2:
        slope, intercept = np.polyfit(np.log(b_grid[usable]), np.log(psi[usable]), 1)
        kappa_hat = float(slope)
        if slope > 0:
            b0_hat = float(math.exp(-intercept / slope))
    return PsiEstimate(
        b_grid=b_grid, psi=psi, kappa_hat=kappa_hat, b0_hat=b0_hat, M=len(nus), proxy=proxy
    )


def estimate_near_degeneracy(
    scenario: Scenario,
    b_grid: np.ndarray,
    M: int,
    rng: np.random.Generator | None = None,
) -> PsiEstimate:
    """Monte Carlo profile of the conditional mean's degeneracy distance.

    Draws M fresh features, prices them with the exact conditional mean, and
    profiles the distances. For the pricing world the mean is outside the
    affine class, so the profile is flagged as a proxy.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if rng is None:
        rng = np.random.default_rng([scenario.seed, 3])
    X = scenario.sample_x_many(rng, M)
    costs = scenario.conditional_mean_many(X)
    return psi_from_costs(
        scenario.polytope(), costs, b_grid, proxy=isinstance(scenario, PricingScenario)
    )


def risk_at_budget(trace: TrialTrace, label_budget: int) -> float | None:
    """Excess risk at the first evaluation once label_budget post-warm-up labels are in.

    Returns None when the trace never reaches the budget (caller decides how
    to report the exclusion).
    """
    for rec in trace.records:
        if rec.n_t - trace.n0 >= label_budget and not math.isnan(rec.excess_spo_risk_test):
            return rec.excess_spo_risk_test
    return None


def labeled_fraction(trace: TrialTrace, t_lo: int, t_hi: int) -> float:
    """Fraction of stream steps with t in [t_lo, t_hi] that acquired a label."""
    flags = [rec.labeled for rec in trace.records if t_lo <= rec.t <= t_hi and rec.t >= 1]
    if not flags:
        raise ValueError(f"trace has no steps in [{t_lo}, {t_hi}]")
    return float(np.mean(flags))


def bootstrap_mean_ci(
    values: Sequence[float] | np.ndarray,
    level: float = 0.9,
    n_boot: int = 2000,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean (deterministic given seed)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot bootstrap an empty sample")
    if not 0 < level < 1:
        raise ValueError("level must be in (0, 1)")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, values.size, size=(n_boot, values.size))
    means = values[idx].mean(axis=1)
    lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def _safe_ratio(num: float, den: float) -> float:
    if den == 0:
        return 1.0 if num == 0 else math.inf
    return num / den


@dataclass(frozen=True)
class RatioRow:
    """One comparison-table row: supervised-over-active mean risk ratio."""

    problem: str
    surrogate: str
    label_budget: int
    ratio: float
    ci_lo: float
    ci_hi: float
    trials: int


def risk_ratio_table(
    traces_supervised: Sequence[TrialTrace],
    traces_mbal: Sequence[TrialTrace],
    label_budget: int,
    *,
    ci_level: float = 0.9,
    n_boot: int = 2000,
    ci_seed: int = 0,
) -> list[RatioRow]:
    """Mean supervised risk over mean active risk at a common label budget.

    Traces are grouped by (problem, surrogate). Trials that never reach the
    budget are dropped with a warning. The interval is a percentile bootstrap
    over trials, resampling the two arms independently (supervised indices
    drawn first). Ratios with a zero active mean report the inf sentinel.
    """
    keys = sorted(
        {(tr.problem, tr.surrogate) for tr in traces_supervised}
        | {(tr.problem, tr.surrogate) for tr in traces_mbal}
    )
    rows: list[RatioRow] = []
    for problem, surrogate in keys:
        sup_all = [tr for tr in traces_supervised if (tr.problem, tr.surrogate) == (problem, surrogate)]
        mbal_all = [tr for tr in traces_mbal if (tr.problem, tr.surrogate) == (problem, surrogate)]
        sup = [r for r in (risk_at_budget(tr, label_budget) for tr in sup_all) if r is not None]
        mbal = [r for r in (risk_at_budget(tr, label_budget) for tr in mbal_all) if r is not None]
        dropped = (len(sup_all) - len(sup)) + (len(mbal_all) - len(mbal))
        if dropped:
            warnings.warn(
                f"{problem}/{surrogate}: excluded {dropped} trial(s) that never reached "
                f"label budget {label_budget}",
                stacklevel=2,
            )
        if not sup or not mbal:
            warnings.warn(
                f"{problem}/{surrogate}: no usable trials on one side; row skipped",
                stacklevel=2,
            )
            continue
        sup_a, mbal_a = np.asarray(sup), np.asarray(mbal)
        ratio = _safe_ratio(float(sup_a.mean()), float(mbal_a.mean()))
        rng = np.random.default_rng(ci_seed)
        sup_idx = rng.integers(0, len(sup_a), size=(n_boot, len(sup_a)))
        mbal_idx = rng.integers(0, len(mbal_a), size=(n_boot, len(mbal_a)))
        sup_means = sup_a[sup_idx].mean(axis=1)
        mbal_means = mbal_a[mbal_idx].mean(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            boot = np.where(
                mbal_means == 0,
                np.where(sup_means == 0, 1.0, math.inf),
                sup_means / mbal_means,
            )
        # Linear interpolation between two infinite order statistics yields nan,
        # so fall back to the raw order statistic when infs are present.
        method = "linear" if np.isfinite(boot).all() else "inverted_cdf"
        lo, hi = np.quantile(boot, [(1 - ci_level) / 2, (1 + ci_level) / 2], method=method)
        rows.append(
            RatioRow(
                problem=problem,
                surrogate=surrogate,
                label_budget=label_budget,
                ratio=ratio,
                ci_lo=float(lo),
                ci_hi=float(hi),
                trials=min(len(sup), len(mbal)),
            )
        )
    return rows
