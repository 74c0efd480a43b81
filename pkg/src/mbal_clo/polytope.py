"""Vertex-represented polytopes with a linear-optimization oracle.

All feasible regions in this package are small polytopes given by an explicit
vertex list, so linear optimization, the distance to degeneracy, and the
optimization gap are computed by exact enumeration over vertices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np


class NormKind(Enum):
    """Norm used for degeneracy distances. Only L2 for now; L2 is self-dual."""

    L2 = "l2"

    def dual(self) -> "NormKind":
        if self is NormKind.L2:
            return NormKind.L2
        raise NotImplementedError(self.value)

    def of(self, x: np.ndarray) -> float:
        if self is NormKind.L2:
            return float(np.linalg.norm(x))
        raise NotImplementedError(self.value)


@dataclass(frozen=True)
class Polytope:
    """Convex hull of an ordered list of vertices in R^d.

    Vertex order is part of the identity: ties in the linear-optimization
    oracle are broken toward the lowest vertex index, so reordering vertices
    changes tie-broken results.
    """

    name: str
    vertices: np.ndarray = field(repr=False)  # (K, d) float64

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError(f"vertices must be a nonempty (K, d) array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        if np.unique(v, axis=0).shape[0] != v.shape[0]:
            raise ValueError("duplicate vertices are not allowed")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @cached_property
    def _vertex_l2_dists(self) -> np.ndarray:
        """Pairwise L2 distances between vertices, used by degeneracy distances."""
        diff = self.vertices[:, None, :] - self.vertices[None, :, :]
        return np.sqrt((diff**2).sum(axis=2))

    def _check_costs(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if c.shape[-1] != self.dim:
            raise ValueError(f"cost dimension {c.shape[-1]} != polytope dimension {self.dim}")
        if not np.all(np.isfinite(c)):
            raise ValueError("cost vector must be finite")
        return c

    def to_json_dict(self) -> dict:
        return {"name": self.name, "d": self.dim, "vertices": self.vertices.tolist()}

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "Polytope":
        poly = cls(name=doc["name"], vertices=np.asarray(doc["vertices"], dtype=float))
        if poly.dim != doc["d"]:
            raise ValueError(f"declared d={doc['d']} but vertices have dimension {poly.dim}")
        return poly

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Polytope":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def solve_lo(poly: Polytope, c: np.ndarray) -> tuple[np.ndarray, int]:
    """Minimize c·w over the polytope's vertices.

    Returns:
        (w_star, index): the optimal vertex (a copy) and its index. Ties are
        broken toward the lowest vertex index.
    """
    c = poly._check_costs(np.atleast_1d(c))
    scores = poly.vertices @ c
    idx = int(np.argmin(scores))
    return poly.vertices[idx].copy(), idx


def solve_lo_many(poly: Polytope, costs: np.ndarray) -> np.ndarray:
    """Vectorized solve_lo: (n, d) cost matrix -> (n,) optimal vertex indices."""
    costs = poly._check_costs(np.atleast_2d(costs))
    return np.argmin(costs @ poly.vertices.T, axis=1)


def distance_to_degeneracy(
    poly: Polytope,
    c: np.ndarray,
    norm: NormKind = NormKind.L2,
    neighbors: Mapping[int, Sequence[int]] | None = None,
) -> float:
    """Distance from c to the nearest cost vector with a non-unique optimum.

    nu_S(c) = min over vertices v_j != w*(c) of c·(v_j - w*(c)) / ||v_j - w*(c)||_*.
    Returns +inf for single-vertex polytopes (minimum over an empty set).

    `neighbors` optionally restricts the minimum to a caller-supplied adjacency
    list (vertex index -> candidate vertex indices). This is a diagnostic
    heuristic only; no adjacency is ever inferred.
    """
    if norm.dual() is not NormKind.L2:  # pragma: no cover - single norm today
        raise NotImplementedError(norm)
    c = poly._check_costs(np.atleast_1d(c))
    if poly.num_vertices == 1:
        return math.inf
    scores = poly.vertices @ c
    idx = int(np.argmin(scores))
    candidates = np.arange(poly.num_vertices) if neighbors is None else np.asarray(neighbors[idx], dtype=int)
    candidates = candidates[candidates != idx]
    if candidates.size == 0:
        return math.inf
    numer = scores[candidates] - scores[idx]
    denom = poly._vertex_l2_dists[idx, candidates]
    return float(np.min(numer / denom))


def distance_to_degeneracy_many(poly: Polytope, costs: np.ndarray, norm: NormKind = NormKind.L2) -> np.ndarray:
    """Vectorized distance_to_degeneracy over an (n, d) cost matrix."""
    if norm.dual() is not NormKind.L2:  # pragma: no cover - single norm today
        raise NotImplementedError(norm)
    costs = poly._check_costs(np.atleast_2d(costs))
    n = costs.shape[0]
    if poly.num_vertices == 1:
        return np.full(n, math.inf)
    scores = costs @ poly.vertices.T  # (n, K)
    idx = np.argmin(scores, axis=1)
    numer = scores - scores[np.arange(n), idx][:, None]
    denom = poly._vertex_l2_dists[idx]  # (n, K)
    ratio = np.divide(numer, denom, out=np.full_like(scores, math.inf), where=denom > 0)
    return ratio.min(axis=1)


def lin_opt_gap(poly: Polytope, c: np.ndarray) -> float:
    """Linear optimization gap omega_S(c) = max_v c·v - min_v c·v."""
    c = poly._check_costs(np.atleast_1d(c))
    scores = poly.vertices @ c
    return float(scores.max() - scores.min())
