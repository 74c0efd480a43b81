"""Stream learner that buys labels only near the decision boundary.

The learner warms up on n0 labeled samples, sets its initial rejection
threshold to an empirical quantile of the warm-up degeneracy distances, and
then labels a stream sample outright when the current prediction sits within
the threshold of a decision flip; far samples are labeled with a small coin
probability and up-weighted by its inverse. The model is refit every
iteration by warm-started subgradient descent. The supervised baseline is the
same loop with an infinite initial threshold, so every sample is labeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import islice
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .datagen import Scenario
from .hypothesis import LinearPredictor, TrainerConfig, fit_erm
from .losses import SPO, SPOPLUS, LabeledSample, SurrogateKind, surrogate_values
from .polytope import NormKind, Polytope, distance_to_degeneracy


@dataclass(frozen=True)
class MbalConfig:
    """Settings for one active-learning trial.

    Attributes:
        p_tilde: probability of labeling a far-from-degeneracy sample anyway
            (0 = hard rejection; such labels are up-weighted by 1/p_tilde).
        q_tilde: quantile of warm-up degeneracy distances used as the initial
            rejection threshold.
        n0: warm-up length; the first n0 stream samples are always labeled.
        surrogate: training loss.
        trainer: subgradient-descent settings for every refit.
        norm: norm used by the degeneracy distance.
        seed: trial seed; feature, label-noise, and coin randomness derive
            from it through fixed sub-streams (tags 0, 1, 2) so that the
            feature sequence is identical across algorithm variants.
        schedule_exponent: threshold decay exponent; the default 0.25 makes
            the threshold shrink like (n0 ln(n0+t)/t)^(1/4).
        warmup_trainer: optional heavier settings for the single warm-up fit.
            The initial threshold is a quantile of h0's degeneracy distances,
            so an underfit h0 miscalibrates it; training the warm-up fit to
            convergence fixes that without slowing the per-step refits. None
            falls back to trainer.
    """

    p_tilde: float = 1e-5
    q_tilde: float = 0.5
    n0: int = 10
    surrogate: SurrogateKind = SPOPLUS
    trainer: TrainerConfig = TrainerConfig()
    norm: NormKind = NormKind.L2
    seed: int = 0
    schedule_exponent: float = 0.25
    warmup_trainer: TrainerConfig | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.p_tilde <= 1:
            raise ValueError("p_tilde must be in [0, 1]")
        if not 0 < self.q_tilde <= 1:
            raise ValueError("q_tilde must be in (0, 1]")
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")


@dataclass
class LearnerState:
    """Mutable per-trial state: model, threshold, and the two label pools."""

    t: int
    h: LinearPredictor
    b0: float
    b_t: float
    W: list[LabeledSample]
    W_tilde: list[LabeledSample]
    coin_rng: np.random.Generator

    @property
    def n_t(self) -> int:
        return len(self.W) + len(self.W_tilde)


@dataclass(frozen=True)
class StepRecord:
    """One stream step: the threshold test, its outcome, and optional test risks."""

    t: int
    nu: float
    b: float
    near_margin: bool
    coin: bool
    labeled: bool
    n_t: int
    surrogate_risk_test: float = math.nan
    excess_spo_risk_test: float = math.nan


@dataclass(frozen=True)
class TrialTrace:
    """Full record of one trial; immutable and cheap to ship between workers."""

    problem: str
    algo: str
    surrogate: str
    trial: int
    seed: int
    n0: int
    records: tuple[StepRecord, ...]

    @property
    def final_labels(self) -> int:
        return self.records[-1].n_t

    def to_json_dict(self) -> dict:
        return {
            "problem": self.problem,
            "algo": self.algo,
            "surrogate": self.surrogate,
            "trial": self.trial,
            "seed": self.seed,
            "n0": self.n0,
            "records": [vars(r).copy() for r in self.records],
        }


def nearest_rank_quantile(values: Sequence[float] | np.ndarray, q: float) -> float:
    """Ascending-sort value at rank ceil(q*n), clamped to rank >= 1."""
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        raise ValueError("quantile of empty sequence")
    if not 0 < q <= 1:
        raise ValueError("q must be in (0, 1]")
    rank = max(1, math.ceil(q * vals.size))
    return float(vals[rank - 1])


def threshold_at(b0: float, n0: int, t: int, exponent: float = 0.25) -> float:
    """Rejection threshold after step t: b0 * (n0 * ln(n0 + t) / t) ** exponent."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return b0 * (n0 * math.log(n0 + t) / t) ** exponent


def warmup_init(
    cfg: MbalConfig,
    stream: Iterable[LabeledSample],
    poly: Polytope,
    *,
    b0_override: float | None = None,
) -> LearnerState:
    """Label the first n0 stream samples, fit h0, and set the initial threshold.

    The threshold seed b0 is the q_tilde nearest-rank quantile of the
    degeneracy distances of h0's predictions on the warm-up features (or
    b0_override, which the supervised baseline sets to inf). The working
    threshold starts at threshold_at(t=1).
    """
    samples = list(islice(iter(stream), cfg.n0))
    if len(samples) < cfg.n0:
        raise ValueError(f"stream exhausted after {len(samples)} samples; warm-up needs {cfg.n0}")
    n_features = samples[0].x.shape[0]
    h0 = fit_erm(
        LinearPredictor.zeros(poly.dim, n_features),
        cfg.surrogate,
        poly,
        samples,
        [],
        cfg.p_tilde,
        float(cfg.n0),
        cfg.warmup_trainer or cfg.trainer,
    )
    if b0_override is not None:
        b0 = float(b0_override)
    else:
        nus = [distance_to_degeneracy(poly, h0.predict(s.x), cfg.norm) for s in samples]
        b0 = nearest_rank_quantile(nus, cfg.q_tilde)
    return LearnerState(
        t=0,
        h=h0,
        b0=b0,
        b_t=threshold_at(b0, cfg.n0, 1, cfg.schedule_exponent),
        W=list(samples),
        W_tilde=[],
        coin_rng=np.random.default_rng([cfg.seed, 2]),
    )


def margin_step(
    state: LearnerState,
    x_t: np.ndarray,
    label_oracle: Callable[[np.ndarray], np.ndarray],
    poly: Polytope,
    cfg: MbalConfig,
) -> tuple[LearnerState, StepRecord]:
    """Advance the learner by one stream sample; mutates and returns state.

    The label oracle is called only when the margin test (or the coin) demands
    a label, never for rejected samples. The model is refit every step with
    denominator t + n0, and the threshold is advanced afterwards, so step t
    compares against the threshold value left by step t-1.
    """
    t = state.t + 1
    b_used = state.b_t
    nu = distance_to_degeneracy(poly, state.h.predict(x_t), cfg.norm)
    near = bool(nu < b_used)
    coin = False
    labeled = False
    if near:
        state.W.append(LabeledSample(x=x_t, c=label_oracle(x_t)))
        labeled = True
    elif cfg.p_tilde > 0:
        coin = bool(state.coin_rng.uniform() < cfg.p_tilde)
        if coin:
            state.W_tilde.append(LabeledSample(x=x_t, c=label_oracle(x_t)))
            labeled = True
    state.h = fit_erm(
        state.h,
        cfg.surrogate,
        poly,
        state.W,
        state.W_tilde,
        cfg.p_tilde,
        float(t + cfg.n0),
        cfg.trainer,
    )
    state.t = t
    state.b_t = threshold_at(state.b0, cfg.n0, t, cfg.schedule_exponent)
    record = StepRecord(
        t=t, nu=nu, b=b_used, near_margin=near, coin=coin, labeled=labeled, n_t=state.n_t
    )
    return state, record


class _TestEvaluator:
    """Precomputes true-mean decision scores so per-step evaluation is two matmuls."""

    def __init__(self, scenario: Scenario, poly: Polytope, test_xs: np.ndarray) -> None:
        self.poly = poly
        self.test_xs = np.atleast_2d(np.asarray(test_xs, dtype=float))
        if self.test_xs.shape[0] == 0:
            raise ValueError("test set must be nonempty")
        self.true_means = scenario.conditional_mean_many(self.test_xs)

    def risks(self, h: LinearPredictor, kind: SurrogateKind) -> tuple[float, float]:
        c_hat = h.predict_many(self.test_xs)
        surrogate = float(np.mean(surrogate_values(kind, self.poly, c_hat, self.true_means)))
        excess = float(np.mean(surrogate_values(SPO, self.poly, c_hat, self.true_means)))
        return surrogate, excess


def run_stream(
    cfg: MbalConfig,
    scenario: Scenario,
    T: int,
    test_set: np.ndarray | None,
    *,
    b0_override: float | None = None,
    stop_after_labels: int | None = None,
    eval_every: int | None = None,
    algo: str = "mbal",
    trial: int = 0,
) -> TrialTrace:
    """Warm up, then run T margin steps against the scenario's sample stream.

    Test risks (surrogate risk and excess decision risk against the true
    conditional mean) are evaluated after warm-up, at every label
    acquisition, at the final step, and every eval_every steps when set;
    other records carry NaN risks. test_set holds feature rows, or None to
    skip evaluation entirely. stop_after_labels ends the stream early once
    that many post-warm-up labels have been acquired.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    poly = scenario.polytope()
    feature_rng = np.random.default_rng([cfg.seed, 0])
    label_rng = np.random.default_rng([cfg.seed, 1])

    def warm_stream() -> Iterator[LabeledSample]:
        while True:
            x = scenario.sample_x(feature_rng)
            yield LabeledSample(x=x, c=scenario.sample_label(x, label_rng))

    state = warmup_init(cfg, warm_stream(), poly, b0_override=b0_override)
    evaluator = _TestEvaluator(scenario, poly, test_set) if test_set is not None else None

    def with_risks(rec: StepRecord) -> StepRecord:
        if evaluator is None:
            return rec
        surrogate, excess = evaluator.risks(state.h, cfg.surrogate)
        return replace(rec, surrogate_risk_test=surrogate, excess_spo_risk_test=excess)

    records = [
        with_risks(
            StepRecord(
                t=0, nu=math.nan, b=state.b_t, near_margin=False, coin=False,
                labeled=False, n_t=state.n_t,
            )
        )
    ]
    oracle = lambda x: scenario.sample_label(x, label_rng)  # noqa: E731
    for t in range(1, T + 1):
        x = scenario.sample_x(feature_rng)
        state, rec = margin_step(state, x, oracle, poly, cfg)
        if rec.labeled or t == T or (eval_every is not None and t % eval_every == 0):
            rec = with_risks(rec)
        records.append(rec)
        if stop_after_labels is not None and state.n_t - cfg.n0 >= stop_after_labels:
            break
    return TrialTrace(
        problem=poly.name,
        algo=algo,
        surrogate=cfg.surrogate.tag,
        trial=trial,
        seed=cfg.seed,
        n0=cfg.n0,
        records=tuple(records),
    )


def run_supervised(
    cfg: MbalConfig,
    scenario: Scenario,
    T: int,
    test_set: np.ndarray | None,
    *,
    stop_after_labels: int | None = None,
    eval_every: int | None = None,
    trial: int = 0,
) -> TrialTrace:
    """Label-everything baseline: run_stream with an infinite initial threshold."""
    return run_stream(
        cfg,
        scenario,
        T,
        test_set,
        b0_override=math.inf,
        stop_after_labels=stop_after_labels,
        eval_every=eval_every,
        algo="supervised",
        trial=trial,
    )
