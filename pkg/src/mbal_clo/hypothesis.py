"""Affine cost-vector predictors and a warm-started subgradient-descent ERM.

The hypothesis class is affine maps x -> W·[x; 1]. The trainer minimizes the
reweighted empirical surrogate loss by full-batch (sub)gradient descent and
returns the best iterate seen, so the objective never increases across a call.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .losses import LabeledSample, SurrogateKind, surrogate_values_and_grads
from .polytope import Polytope


@dataclass(frozen=True)
class LinearPredictor:
    """Affine predictor c_hat = weights · [x; 1]; last weight column is the intercept."""

    weights: np.ndarray = field(repr=False)  # (d, p+1)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[1] < 2:
            raise ValueError(f"weights must be (d, p+1) with p >= 1, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    @property
    def p(self) -> int:
        return self.weights.shape[1] - 1

    @classmethod
    def zeros(cls, d: int, p: int) -> "LinearPredictor":
        return cls(np.zeros((d, p + 1)))

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.p,):
            raise ValueError(f"expected feature shape ({self.p},), got {x.shape}")
        return self.weights[:, :-1] @ x + self.weights[:, -1]

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.p:
            raise ValueError(f"expected feature dimension {self.p}, got {X.shape[1]}")
        return X @ self.weights[:, :-1].T + self.weights[:, -1]

    def to_json_dict(self) -> dict:
        return {"d": self.d, "p": self.p, "weights": self.weights.ravel().tolist()}

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "LinearPredictor":
        w = np.asarray(doc["weights"], dtype=float).reshape(doc["d"], doc["p"] + 1)
        return cls(w)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "LinearPredictor":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TrainerConfig:
    """Subgradient-descent settings for one fit_erm call.

    step_decay "inv_sqrt" uses step_size/sqrt(epoch); "constant" keeps step_size.
    tolerance stops early once the objective changes by less than this between
    epochs. weight_clip, when set, projects every weight entry into
    [-weight_clip, weight_clip] after each step (compact hypothesis class).
    """

    step_size: float = 0.1
    step_decay: str = "inv_sqrt"
    epochs_per_update: int = 50
    tolerance: float = 1e-8
    weight_clip: float | None = None

    def __post_init__(self) -> None:
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")
        if self.step_decay not in ("constant", "inv_sqrt"):
            raise ValueError(f"unknown step_decay {self.step_decay!r}")
        if self.epochs_per_update < 1:
            raise ValueError("epochs_per_update must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.weight_clip is not None and not self.weight_clip > 0:
            raise ValueError("weight_clip must be > 0 when set")


def _stack_weighted(
    W: Sequence[LabeledSample], W_tilde: Sequence[LabeledSample], p_tilde: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = [s.x for s in W] + [s.x for s in W_tilde]
    cs = [s.c for s in W] + [s.c for s in W_tilde]
    wts = np.concatenate([np.ones(len(W)), np.full(len(W_tilde), 1.0 / p_tilde if W_tilde else 0.0)])
    return np.stack(xs), np.stack(cs), wts


def fit_erm(
    init: LinearPredictor,
    kind: SurrogateKind,
    poly: Polytope | None,
    W: Sequence[LabeledSample],
    W_tilde: Sequence[LabeledSample],
    p_tilde: float,
    denom: float,
    cfg: TrainerConfig,
) -> LinearPredictor:
    """Minimize the reweighted empirical loss by full-batch subgradient descent.

    Warm-starts from `init` and returns the best iterate evaluated during the
    run, so the returned predictor's objective is never worse than init's.
    Deterministic: identical inputs give bit-identical weights.

    Steps are sized for the weighted-mean objective: the raw objective divides
    by `denom`, which can be much larger than the total sample weight when most
    stream samples were rejected, so the step is rescaled by denom/total_weight
    to keep the descent geometry independent of that bookkeeping scale.
    """
    if not W and not W_tilde:
        return init
    if W_tilde and not p_tilde > 0:
        raise ValueError("p_tilde must be > 0 when W_tilde is nonempty")
    X, C, wts = _stack_weighted(W, W_tilde, p_tilde)
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    step_scale = denom / float(wts.sum())
    weights = init.weights.copy()

    def eval_point(wm: np.ndarray) -> tuple[float, np.ndarray]:
        values, grads = surrogate_values_and_grads(kind, poly, Xa @ wm.T, C)
        obj = float(wts @ values) / denom
        grad = (grads * wts[:, None]).T @ Xa / denom
        return obj, grad

    best_w, best_obj = weights.copy(), math.inf
    prev_obj = math.inf
    for epoch in range(1, cfg.epochs_per_update + 1):
        obj, grad = eval_point(weights)
        if obj < best_obj:
            best_obj, best_w = obj, weights.copy()
        if abs(prev_obj - obj) < cfg.tolerance:
            break
        prev_obj = obj
        step = cfg.step_size / math.sqrt(epoch) if cfg.step_decay == "inv_sqrt" else cfg.step_size
        weights = weights - step * step_scale * grad
        if cfg.weight_clip is not None:
            np.clip(weights, -cfg.weight_clip, cfg.weight_clip, out=weights)
    final_obj, _ = eval_point(weights)
    if final_obj < best_obj:
        best_obj, best_w = final_obj, weights
    return LinearPredictor(best_w)
