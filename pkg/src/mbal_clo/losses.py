"""Decision-aware and regression surrogate losses.

The decision losses measure regret through the polytope's linear-optimization
oracle; the regression losses compare cost vectors coordinate-wise. Batched
(value, subgradient) helpers back both the trainer and test-risk evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .polytope import Polytope, solve_lo_many

if TYPE_CHECKING:  # pragma: no cover
    from .hypothesis import LinearPredictor

_REGRESSION_TAGS = ("squared", "mae", "huber")
_ALL_TAGS = ("spo", "spoplus") + _REGRESSION_TAGS


@dataclass(frozen=True)
class SurrogateKind:
    """Which per-sample loss the learner trains and reports.

    tag: one of "spo", "spoplus", "squared", "mae", "huber".
    huber_delta: transition width for the Huber loss (ignored by other kinds).
    """

    tag: str
    huber_delta: float = 1.0

    def __post_init__(self) -> None:
        if self.tag not in _ALL_TAGS:
            raise ValueError(f"unknown surrogate tag {self.tag!r}, expected one of {_ALL_TAGS}")
        if self.tag == "huber" and not self.huber_delta > 0:
            raise ValueError(f"huber delta must be > 0, got {self.huber_delta}")

    @property
    def is_regression(self) -> bool:
        return self.tag in _REGRESSION_TAGS

    @property
    def needs_polytope(self) -> bool:
        return self.tag in ("spo", "spoplus")


SPO = SurrogateKind("spo")
SPOPLUS = SurrogateKind("spoplus")
SQUARED = SurrogateKind("squared")
MAE = SurrogateKind("mae")


def huber(delta: float = 1.0) -> SurrogateKind:
    return SurrogateKind("huber", huber_delta=delta)


def parse_surrogate(text: str, huber_delta: float = 1.0) -> SurrogateKind:
    return SurrogateKind(text.lower(), huber_delta=huber_delta)


@dataclass(frozen=True)
class LabeledSample:
    """One (feature, cost-vector) observation."""

    x: np.ndarray  # (p,)
    c: np.ndarray  # (d,)

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.c))):
            raise ValueError("sample entries must be finite")


def _as_batch(poly: Polytope, c_hat: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c_hat = poly._check_costs(np.atleast_2d(c_hat))
    c = poly._check_costs(np.atleast_2d(c))
    if c_hat.shape != c.shape:
        raise ValueError(f"shape mismatch between predictions {c_hat.shape} and costs {c.shape}")
    return c_hat, c


def surrogate_values_and_grads(
    kind: SurrogateKind, poly: Polytope | None, c_hat: np.ndarray, c: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample loss values and subgradients in c_hat, batched.

    Args:
        kind: surrogate to evaluate.
        poly: feasible region; required by the decision losses.
        c_hat: (n, d) predictions.
        c: (n, d) observed cost vectors.

    Returns:
        (values, grads) with shapes (n,) and (n, d). For the raw SPO kind the
        value is the SPO loss but the gradient is the SPO+ subgradient used as
        a descent-direction heuristic (the SPO loss itself is nonconvex with
        no informative subgradient).
    """
    if kind.needs_polytope:
        if poly is None:
            raise ValueError(f"{kind.tag} loss requires a polytope")
        c_hat, c = _as_batch(poly, c_hat, c)
        v = poly.vertices
        n = c.shape[0]
        rows = np.arange(n)
        scores_c = c @ v.T
        idx_star = np.argmin(scores_c, axis=1)  # w*(c)
        idx_flip = solve_lo_many(poly, 2.0 * c_hat - c)  # w*(2c_hat - c)
        grads = 2.0 * (v[idx_star] - v[idx_flip])
        if kind.tag == "spoplus":
            # max_w (c - 2c_hat)·w  +  2c_hat·w*(c)  -  c·w*(c)
            scores_hat = c_hat @ v.T
            max_term = (scores_c - 2.0 * scores_hat)[rows, idx_flip]
            values = max_term + 2.0 * scores_hat[rows, idx_star] - scores_c[rows, idx_star]
        else:  # spo: c·w*(c_hat) - c·w*(c)
            idx_hat = solve_lo_many(poly, c_hat)
            values = scores_c[rows, idx_hat] - scores_c[rows, idx_star]
        return values, grads

    c_hat = np.atleast_2d(np.asarray(c_hat, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if c_hat.shape != c.shape:
        raise ValueError(f"shape mismatch between predictions {c_hat.shape} and costs {c.shape}")
    r = c_hat - c
    if kind.tag == "squared":
        return (r**2).sum(axis=1), 2.0 * r
    if kind.tag == "mae":
        return np.abs(r).sum(axis=1), np.sign(r)
    # huber
    delta = kind.huber_delta
    absr = np.abs(r)
    per_coord = np.where(absr <= delta, 0.5 * r**2, delta * (absr - 0.5 * delta))
    return per_coord.sum(axis=1), np.clip(r, -delta, delta)


def surrogate_values(kind: SurrogateKind, poly: Polytope | None, c_hat: np.ndarray, c: np.ndarray) -> np.ndarray:
    return surrogate_values_and_grads(kind, poly, c_hat, c)[0]


def spo_loss(poly: Polytope, c_hat: np.ndarray, c: np.ndarray) -> float:
    """Decision regret c·w*(c_hat) - c·w*(c). Nonnegative."""
    values, _ = surrogate_values_and_grads(SPO, poly, c_hat, c)
    return float(values[0])


def spo_plus_loss(poly: Polytope, c_hat: np.ndarray, c: np.ndarray) -> float:
    """Convex upper bound max_w (c-2c_hat)·w + 2c_hat·w*(c) - c·w*(c)."""
    values, _ = surrogate_values_and_grads(SPOPLUS, poly, c_hat, c)
    return float(values[0])


def spo_plus_subgradient(poly: Polytope, c_hat: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Subgradient 2(w*(c) - w*(2c_hat - c)) of c_hat -> spo_plus_loss(c_hat, c)."""
    _, grads = surrogate_values_and_grads(SPOPLUS, poly, c_hat, c)
    return grads[0]


def regression_loss(kind: SurrogateKind, c_hat: np.ndarray, c: np.ndarray) -> tuple[float, np.ndarray]:
    """Value and subgradient of a coordinate-wise regression surrogate."""
    if not kind.is_regression:
        raise ValueError(f"{kind.tag} is not a regression surrogate")
    values, grads = surrogate_values_and_grads(kind, None, c_hat, c)
    return float(values[0]), grads[0]


def reweighted_empirical_loss(
    kind: SurrogateKind,
    poly: Polytope | None,
    predictor: "LinearPredictor",
    W: Sequence[LabeledSample],
    W_tilde: Sequence[LabeledSample],
    p_tilde: float,
    denom: float,
) -> float:
    """Training objective: (sum_W loss + (1/p_tilde) sum_W_tilde loss) / denom.

    Samples in W_tilde were kept with probability p_tilde, so their up-weighting
    makes the objective an unbiased estimate of the population surrogate risk.
    """
    if W_tilde and not p_tilde > 0:
        raise ValueError("p_tilde must be > 0 when W_tilde is nonempty")
    if denom < len(W) + len(W_tilde):
        raise ValueError(f"denom {denom} smaller than the number of samples {len(W) + len(W_tilde)}")
    total = 0.0
    for group, weight in ((W, 1.0), (W_tilde, 1.0 / p_tilde if W_tilde else 0.0)):
        if not group:
            continue
        X = np.stack([s.x for s in group])
        C = np.stack([s.c for s in group])
        total += weight * float(surrogate_values(kind, poly, predictor.predict_many(X), C).sum())
    return total / denom
