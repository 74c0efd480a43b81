"""Trial aggregation for figures: means with percentile-bootstrap bands.

The math here deliberately mirrors the mbal-clo package's reporting (same
resampling scheme, same seed, same quantile rule), so bands drawn from a
CSV agree with the numbers printed by the solver's own tooling to within
floating-point reproduction, not merely statistically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .schemas import RunData


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


@dataclass(frozen=True)
class CurveBands:
    """Mean excess risk vs. post-warm-up label count, with CI band arrays."""

    label: str
    x: np.ndarray = field(repr=False)
    mean: np.ndarray = field(repr=False)
    lo: np.ndarray = field(repr=False)
    hi: np.ndarray = field(repr=False)


def risk_at_budget_rows(run: RunData, trial: int, budget: int) -> float | None:
    """First finite risk once a trial holds `budget` post-warm-up labels.

    Same selection rule as the solver's per-trace budget lookup: records in
    stream order, threshold on labels beyond the warm-up set, NaN evaluations
    skipped. None when the trial never reaches the budget.
    """
    mask = run.trial == trial
    reached = mask & (run.n_labels - run.n0 >= budget) & np.isfinite(run.excess_spo_risk)
    if not reached.any():
        return None
    order = np.argsort(run.t[reached], kind="stable")
    return float(run.excess_spo_risk[reached][order[0]])


def learning_curve_bands(run: RunData, level: float = 0.9) -> CurveBands:
    """Aggregate one run CSV into a mean curve with bootstrap bands.

    The x grid is every post-warm-up label budget reached by all trials,
    so each band point averages the same trial count. A single-trial file
    yields bands that collapse onto the line.
    """
    trials = run.trials
    budgets = []
    for trial in trials:
        mask = (run.trial == trial) & np.isfinite(run.excess_spo_risk)
        if not mask.any():
            raise ValueError(f"{run.path}: trial {trial} has no finite risk evaluations")
        budgets.append(int(run.n_labels[mask].max()) - run.n0)
    x = np.arange(1, min(budgets) + 1)
    if x.size == 0:
        raise ValueError(f"{run.path}: no trial reached a post-warm-up label")
    mean = np.empty(x.size)
    lo = np.empty(x.size)
    hi = np.empty(x.size)
    for i, budget in enumerate(x):
        values = [risk_at_budget_rows(run, trial, int(budget)) for trial in trials]
        arr = np.array([v for v in values if v is not None], dtype=float)
        mean[i] = arr.mean()
        lo[i], hi[i] = bootstrap_mean_ci(arr, level=level)
    return CurveBands(label=f"{run.algo} ({run.surrogate})", x=x, mean=mean, lo=lo, hi=hi)


@dataclass(frozen=True)
class FractionPoint:
    """Labeled fraction of the stream for one run file, keyed by q_tilde."""

    q_tilde: float
    mean: float
    lo: float
    hi: float
    algo: str


def labeled_fraction_point(run: RunData, level: float = 0.9) -> FractionPoint:
    """Mean per-trial labeled fraction over stream steps (t >= 1)."""
    fractions = []
    for trial in run.trials:
        mask = (run.trial == trial) & (run.t >= 1)
        if not mask.any():
            raise ValueError(f"{run.path}: trial {trial} has no stream steps")
        fractions.append(float(run.labeled[mask].mean()))
    lo, hi = bootstrap_mean_ci(fractions, level=level)
    return FractionPoint(
        q_tilde=run.q_tilde, mean=float(np.mean(fractions)), lo=lo, hi=hi, algo=run.algo
    )
