"""Synthetic worlds: grid shortest-path and three-item pricing.

Each scenario bundles a feasible-region builder, a Gaussian-mixture feature
sampler, a noisy label sampler, and the exact conditional mean of the cost
vector. Scenarios serialize to JSON so a generated world can be replayed
byte-for-byte from its file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import Mapping

import numpy as np

from .losses import LabeledSample
from .polytope import Polytope, distance_to_degeneracy_many, solve_lo_many

# ---------------------------------------------------------------------------
# grid shortest path
# ---------------------------------------------------------------------------


def build_grid_polytope(k: int) -> Polytope:
    """Edge-incidence vertices of all monotone corner-to-corner paths on a k x k grid.

    Edges are indexed east edges first (row-major), then north edges
    (row-major); d = 2k(k-1). Moving only north/east, a path is fixed by
    which of its 2(k-1) moves are east, so there are C(2(k-1), k-1) vertices.
    """
    if k < 2:
        raise ValueError(f"grid side must be >= 2, got {k}")
    n_moves = 2 * (k - 1)
    d = 2 * k * (k - 1)

    def east_edge(row: int, col: int) -> int:
        return row * (k - 1) + col

    def north_edge(row: int, col: int) -> int:
        return k * (k - 1) + row * k + col

    vertices = []
    for east_positions in combinations(range(n_moves), k - 1):
        row = col = 0
        v = np.zeros(d)
        east_set = set(east_positions)
        for move in range(n_moves):
            if move in east_set:
                v[east_edge(row, col)] = 1.0
                col += 1
            else:
                v[north_edge(row, col)] = 1.0
                row += 1
        vertices.append(v)
    return Polytope(name=f"grid-{k}x{k}", vertices=np.stack(vertices))


@dataclass(frozen=True)
class ShortestPathScenario:
    """Grid shortest-path world with mixture-of-Gaussians features.

    Features are drawn from an equal-weight mixture of Gaussians
    N(center_j, sigma_m2 * I); each mixture center was searched so that its
    conditional-mean cost vector makes the matching target path uniquely
    optimal with a comfortable degeneracy distance. Labels multiply the
    conditional mean entrywise by independent U[1-eps_bar, 1+eps_bar] noise.

    Attributes:
        k: grid side (nodes per side); the cost dimension is 2k(k-1).
        n_features: feature dimension.
        coef_matrix: (d, n_features) binary matrix mixing features into edge costs.
        centers: (n_targets, n_features) accepted mixture centers.
        target_paths: vertex index each center makes optimal.
        sigma_m2: variance of each mixture component.
        deg: polynomial degree of the mean cost model.
        eps_bar: half-width of the multiplicative label noise.
        degeneracy_threshold: absolute acceptance floor used in the center
            search, or None for the relative rule 0.1 * ||mean cost||_2.
        seed: seed the generator was built from.
    """

    k: int
    n_features: int
    coef_matrix: np.ndarray = field(repr=False)
    centers: np.ndarray = field(repr=False)
    target_paths: tuple[int, ...]
    sigma_m2: float
    deg: int
    eps_bar: float
    degeneracy_threshold: float | None
    seed: int

    def __post_init__(self) -> None:
        B = np.asarray(self.coef_matrix, dtype=float)
        mus = np.asarray(self.centers, dtype=float)
        if self.k < 2:
            raise ValueError("k must be >= 2")
        d = 2 * self.k * (self.k - 1)
        if B.shape != (d, self.n_features):
            raise ValueError(f"coef_matrix must be ({d}, {self.n_features}), got {B.shape}")
        if mus.ndim != 2 or mus.shape != (len(self.target_paths), self.n_features):
            raise ValueError("centers must be (n_targets, n_features)")
        if not (0 <= self.eps_bar < 1):
            raise ValueError("eps_bar must be in [0, 1)")
        if self.sigma_m2 < 0:
            raise ValueError("sigma_m2 must be >= 0")
        if self.deg < 1:
            raise ValueError("deg must be >= 1")
        for arr in (B, mus):
            arr.flags.writeable = False
        object.__setattr__(self, "coef_matrix", B)
        object.__setattr__(self, "centers", mus)
        object.__setattr__(self, "target_paths", tuple(int(j) for j in self.target_paths))

    @property
    def d(self) -> int:
        return 2 * self.k * (self.k - 1)

    def polytope(self) -> Polytope:
        return build_grid_polytope(self.k)

    def conditional_mean(self, x: np.ndarray) -> np.ndarray:
        return self.conditional_mean_many(np.asarray(x, dtype=float)[None, :])[0]

    def conditional_mean_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected feature dimension {self.n_features}, got {X.shape[1]}")
        lin = X @ self.coef_matrix.T / math.sqrt(self.n_features)
        return 1.0 + (1.0 + lin) ** self.deg

    def sample_x(self, rng: np.random.Generator) -> np.ndarray:
        comp = int(rng.integers(len(self.centers)))
        return self.centers[comp] + math.sqrt(self.sigma_m2) * rng.standard_normal(self.n_features)

    def sample_x_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        comps = rng.integers(len(self.centers), size=size)
        noise = math.sqrt(self.sigma_m2) * rng.standard_normal((size, self.n_features))
        return self.centers[comps] + noise

    def sample_label(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        eps = rng.uniform(1.0 - self.eps_bar, 1.0 + self.eps_bar, self.d)
        return self.conditional_mean(x) * eps

    def sample(self, rng: np.random.Generator) -> LabeledSample:
        x = self.sample_x(rng)
        return LabeledSample(x=x, c=self.sample_label(x, rng))


def gen_shortest_path_scenario(
    seed: int,
    k: int = 3,
    eps_bar: float = 0.25,
    degeneracy_threshold: float | None = None,
    *,
    n_features: int = 5,
    sigma_m2: float = 1.0 / 9.0,
    deg: int = 1,
    max_coef_resamples: int = 50,
    max_center_candidates: int = 10_000,
) -> ShortestPathScenario:
    """Search for a coefficient matrix and mixture centers with clean optima.

    The binary coefficient matrix is resampled (entrywise fair coin) until,
    for every target path, some standard-normal candidate center has a
    conditional-mean cost whose unique optimum is that path and whose
    degeneracy distance clears the threshold (0.1 * ||mean||_2 when
    degeneracy_threshold is None). Raises RuntimeError with per-path search
    diagnostics if the budget runs out.
    """
    poly = build_grid_polytope(k)
    rng = np.random.default_rng(seed)
    n_targets = min(6, poly.num_vertices)
    if poly.num_vertices <= 6:
        targets = tuple(range(poly.num_vertices))
    else:
        targets = tuple(sorted(int(j) for j in rng.choice(poly.num_vertices, n_targets, replace=False)))

    d = poly.dim
    failures: list[str] = []
    for _ in range(max_coef_resamples):
        B = rng.integers(0, 2, size=(d, n_features)).astype(float)
        centers = np.empty((n_targets, n_features))
        ok = True
        for slot, path in enumerate(targets):
            cands = rng.standard_normal((max_center_candidates, n_features))
            means = 1.0 + (1.0 + cands @ B.T / math.sqrt(n_features)) ** deg
            idx = solve_lo_many(poly, means)
            nus = distance_to_degeneracy_many(poly, means)
            if degeneracy_threshold is None:
                floor = 0.1 * np.linalg.norm(means, axis=1)
            else:
                floor = np.full(len(means), degeneracy_threshold)
            hits = np.flatnonzero((idx == path) & (nus >= floor))
            if hits.size == 0:
                failures.append(f"path {path}: 0/{max_center_candidates} candidates accepted")
                ok = False
                break
            centers[slot] = cands[hits[0]]
        if ok:
            return ShortestPathScenario(
                k=k,
                n_features=n_features,
                coef_matrix=B,
                centers=centers,
                target_paths=targets,
                sigma_m2=sigma_m2,
                deg=deg,
                eps_bar=eps_bar,
                degeneracy_threshold=degeneracy_threshold,
                seed=seed,
            )
    raise RuntimeError(
        f"no coefficient matrix found in {max_coef_resamples} resamples "
        f"(seed={seed}, k={k}, threshold={degeneracy_threshold}); failures: {failures[-5:]}"
    )


def sample_shortest_path(scn: ShortestPathScenario, rng: np.random.Generator) -> LabeledSample:
    return scn.sample(rng)


# ---------------------------------------------------------------------------
# three-item pricing
# ---------------------------------------------------------------------------

PRICING_PRICES: tuple[float, ...] = (60.0, 80.0, 90.0)
PRICING_PRICE_COEFS: tuple[float, ...] = (-0.0202733, -0.0133531, -0.00540672)
PRICING_BASE_COEFS: tuple[float, ...] = (-1.19155, -1.45748, -1.22819)

# Each center fixes per-item (base, price) demand coefficients; feature layout
# is [base_1, base_2, base_3, price_1, price_2, price_3].
_A = PRICING_PRICE_COEFS
_B = PRICING_BASE_COEFS
PRICING_CENTERS: tuple[tuple[float, ...], ...] = (
    (_B[0], _B[0], _B[0], _A[0], _A[0], _A[0]),
    (_B[0], _B[1], _B[2], _A[0], _A[1], _A[2]),
    (_B[2], _B[2], _B[2], _A[2], _A[2], _A[2]),
    (_B[1], _B[1], _B[1], _A[1], _A[1], _A[1]),
    (_B[0], _B[0], _B[1], _A[0], _A[0], _A[1]),
    (_B[1], _B[2], _B[2], _A[1], _A[2], _A[2]),
    (_B[0], _B[0], _B[2], _A[0], _A[0], _A[2]),
)


def build_pricing_polytope() -> Polytope:
    """One-hot price menus for three items with non-decreasing prices.

    Coordinates are laid out item-major: entry 3*item + price_idx selects the
    price_idx-th price for that item. Exactly one price per item, and the
    chosen prices must be non-decreasing from item 1 to item 3, giving the 10
    monotone assignments out of 27.
    """
    n_prices = len(PRICING_PRICES)
    vertices = []
    for i0 in range(n_prices):
        for i1 in range(i0, n_prices):
            for i2 in range(i1, n_prices):
                v = np.zeros(3 * n_prices)
                for item, pick in enumerate((i0, i1, i2)):
                    v[3 * item + pick] = 1.0
                vertices.append(v)
    return Polytope(name="pricing-3x3", vertices=np.stack(vertices))


@dataclass(frozen=True)
class PricingScenario:
    """Three items, three candidate prices, log-linear demand.

    Features are per-item demand coefficients drawn from an equal-weight
    mixture over seven fixed centers with isotropic sd feature_sd. The label
    entry for (item j, price i) is minus the revenue eps * exp(x_base_j +
    x_price_j * price_i) * price_i, so minimizing total cost maximizes
    expected revenue. The affine hypothesis class cannot represent this mean,
    which is the point of the scenario.

    Attributes:
        feature_sd: per-coordinate standard deviation around the centers.
        eps_bar: half-width of the multiplicative demand noise.
        shared_item_noise: draw one noise factor per item (shared across its
            three prices) instead of one per cost entry.
        seed: seed recorded for provenance; sampling uses caller rngs.
    """

    feature_sd: float = 0.01
    eps_bar: float = 0.1
    shared_item_noise: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.eps_bar < 1):
            raise ValueError("eps_bar must be in [0, 1)")
        if self.feature_sd < 0:
            raise ValueError("feature_sd must be >= 0")

    @property
    def n_features(self) -> int:
        return 6

    @property
    def d(self) -> int:
        return 9

    @property
    def centers(self) -> np.ndarray:
        return np.asarray(PRICING_CENTERS, dtype=float)

    def polytope(self) -> Polytope:
        return build_pricing_polytope()

    def conditional_mean(self, x: np.ndarray) -> np.ndarray:
        return self.conditional_mean_many(np.asarray(x, dtype=float)[None, :])[0]

    def conditional_mean_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected feature dimension {self.n_features}, got {X.shape[1]}")
        prices = np.asarray(PRICING_PRICES)
        out = np.empty((X.shape[0], self.d))
        for item in range(3):
            # mean cost = -price * E[demand] = -price * exp(base + price_coef * price)
            out[:, 3 * item : 3 * item + 3] = -prices * np.exp(
                X[:, item : item + 1] + X[:, 3 + item : 4 + item] * prices
            )
        return out

    def sample_x(self, rng: np.random.Generator) -> np.ndarray:
        comp = int(rng.integers(len(PRICING_CENTERS)))
        return self.centers[comp] + self.feature_sd * rng.standard_normal(self.n_features)

    def sample_x_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        comps = rng.integers(len(PRICING_CENTERS), size=size)
        noise = self.feature_sd * rng.standard_normal((size, self.n_features))
        return self.centers[comps] + noise

    def sample_label(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.shared_item_noise:
            eps = np.repeat(rng.uniform(1.0 - self.eps_bar, 1.0 + self.eps_bar, 3), 3)
        else:
            eps = rng.uniform(1.0 - self.eps_bar, 1.0 + self.eps_bar, self.d)
        return self.conditional_mean(x) * eps

    def sample(self, rng: np.random.Generator) -> LabeledSample:
        x = self.sample_x(rng)
        return LabeledSample(x=x, c=self.sample_label(x, rng))


def gen_pricing_scenario(
    seed: int, eps_bar: float = 0.1, *, shared_item_noise: bool = False
) -> PricingScenario:
    return PricingScenario(eps_bar=eps_bar, shared_item_noise=shared_item_noise, seed=seed)


def gen_pricing_sample(scn: PricingScenario, rng: np.random.Generator) -> LabeledSample:
    return scn.sample(rng)


# ---------------------------------------------------------------------------
# shared scenario helpers
# ---------------------------------------------------------------------------

Scenario = ShortestPathScenario | PricingScenario


def conditional_mean(scn: Scenario, x: np.ndarray) -> np.ndarray:
    return scn.conditional_mean(x)


@dataclass(frozen=True)
class TrueModel:
    """Exact conditional-mean cost model of a scenario (deterministic in x)."""

    scenario: Scenario

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.scenario.conditional_mean(x)

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        return self.scenario.conditional_mean_many(X)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.predict(x)


def scenario_to_json_dict(scn: Scenario) -> dict:
    if isinstance(scn, ShortestPathScenario):
        return {
            "kind": "shortest_path",
            "k": scn.k,
            "n_features": scn.n_features,
            "coef_matrix": scn.coef_matrix.tolist(),
            "centers": scn.centers.tolist(),
            "target_paths": list(scn.target_paths),
            "sigma_m2": scn.sigma_m2,
            "deg": scn.deg,
            "eps_bar": scn.eps_bar,
            "degeneracy_threshold": scn.degeneracy_threshold,
            "seed": scn.seed,
        }
    return {
        "kind": "pricing",
        "feature_sd": scn.feature_sd,
        "eps_bar": scn.eps_bar,
        "shared_item_noise": scn.shared_item_noise,
        "seed": scn.seed,
    }


def scenario_from_json_dict(doc: Mapping) -> Scenario:
    kind = doc.get("kind")
    if kind == "shortest_path":
        return ShortestPathScenario(
            k=int(doc["k"]),
            n_features=int(doc["n_features"]),
            coef_matrix=np.asarray(doc["coef_matrix"], dtype=float),
            centers=np.asarray(doc["centers"], dtype=float),
            target_paths=tuple(doc["target_paths"]),
            sigma_m2=float(doc["sigma_m2"]),
            deg=int(doc["deg"]),
            eps_bar=float(doc["eps_bar"]),
            degeneracy_threshold=(
                None if doc["degeneracy_threshold"] is None else float(doc["degeneracy_threshold"])
            ),
            seed=int(doc["seed"]),
        )
    if kind == "pricing":
        return PricingScenario(
            feature_sd=float(doc["feature_sd"]),
            eps_bar=float(doc["eps_bar"]),
            shared_item_noise=bool(doc["shared_item_noise"]),
            seed=int(doc["seed"]),
        )
    raise ValueError(f"unknown scenario kind {kind!r}")


def save_scenario(scn: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_json_dict(scn), sort_keys=True) + "\n")


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_json_dict(json.loads(Path(path).read_text()))


def with_eps_bar(scn: Scenario, eps_bar: float) -> Scenario:
    """Same world, different label-noise level (sensitivity sweeps)."""
    return replace(scn, eps_bar=eps_bar)


def sample_degeneracy_profile_cost(
    poly: Polytope, kappa: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw cost vectors whose near-degeneracy mass scales like b**kappa.

    Starts from U uniform in the unit ball and rescales along the ray by
    nu(U)**(1/kappa - 1), which maps the degeneracy distance to nu(U)**(1/kappa)
    by positive homogeneity. kappa=1 returns the uniform draws unchanged.
    """
    if kappa <= 0:
        raise ValueError("kappa must be > 0")
    dim = poly.dim
    g = rng.standard_normal((size, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radii = rng.uniform(0.0, 1.0, size) ** (1.0 / dim)
    U = g * radii[:, None]
    if kappa == 1.0:
        return U
    nus = distance_to_degeneracy_many(poly, U)
    scale = np.where(nus > 0, nus ** (1.0 / kappa - 1.0), 0.0)
    return U * scale[:, None]
