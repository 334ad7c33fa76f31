"""Metric-space responses and pairwise distance matrices.

Five response variants are supported: Euclidean vectors, points on a unit
sphere (geodesic distance), quantile functions on a probability grid
(2-Wasserstein via quadrature), discrete pmfs (Hellinger), and a
location-scale Gaussian shortcut whose Wasserstein distance has a closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL
from .errors import IncompatibleResponseError, InvalidInputError, ShapeError


@dataclass(frozen=True)
class EuclideanVector:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


@dataclass(frozen=True)
class SpherePoint:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if abs(np.linalg.norm(v) - 1.0) > DEFAULT_TOL.unit_norm:
            raise InvalidInputError("sphere point is not unit-norm")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class QuantileFunction:
    """Quantile values on a strictly increasing grid of interior probabilities."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape:
            raise ShapeError("grid and values must have equal length")
        if np.any(g <= 0) or np.any(g >= 1) or np.any(np.diff(g) <= 0):
            raise InvalidInputError("grid must be strictly increasing within (0, 1)")
        if np.any(np.diff(v) < 0):
            raise InvalidInputError("quantile values must be non-decreasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class DiscretePmf:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > DEFAULT_TOL.unit_norm:
            raise InvalidInputError("pmf entries must be non-negative and sum to 1")
        object.__setattr__(self, "probabilities", p)


@dataclass(frozen=True)
class GaussianLocation:
    """Gaussian distribution N(mu, sigma^2) represented by its parameters.

    The 2-Wasserstein distance between two members of this family is exact:
    sqrt((mu - mu')^2 + (sigma - sigma')^2), which reduces to |mu - mu'| for
    equal sigma.
    """

    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidInputError("sigma must be positive")


ResponseObject = (
    EuclideanVector | SpherePoint | QuantileFunction | DiscretePmf | GaussianLocation
)

_TYPE_TAGS = {
    EuclideanVector: "euclidean",
    SpherePoint: "sphere",
    QuantileFunction: "quantile",
    DiscretePmf: "pmf",
    GaussianLocation: "gaussian_loc",
}


def _wasserstein_grid(a: QuantileFunction, b: QuantileFunction) -> float:
    if a.grid.shape != b.grid.shape or np.any(a.grid != b.grid):
        raise ShapeError("quantile functions must share the same probability grid")
    t = a.grid
    f = (a.values - b.values) ** 2
    # Trapezoid over the interior grid plus rectangle extensions to t=0 and
    # t=1, so a constant integrand integrates exactly.
    integral = float(np.trapz(f, t) + f[0] * t[0] + f[-1] * (1.0 - t[-1]))
    return float(np.sqrt(max(integral, 0.0)))


def distance(a: ResponseObject, b: ResponseObject) -> float:
    """Metric distance between two responses of the same variant."""
    if type(a) is not type(b):
        raise IncompatibleResponseError(
            f"cannot compare {_TYPE_TAGS.get(type(a))} with {_TYPE_TAGS.get(type(b))}"
        )
    if isinstance(a, EuclideanVector):
        if a.values.shape != b.values.shape:
            raise ShapeError("euclidean responses have different dimensions")
        return float(np.linalg.norm(a.values - b.values))
    if isinstance(a, SpherePoint):
        if a.values.shape != b.values.shape:
            raise ShapeError("sphere points have different dimensions")
        # 2*arcsin(chord/2) equals arccos of the inner product but is
        # numerically stable for nearby points (exactly 0 at coincidence,
        # where arccos loses half the significant digits).
        half_chord = 0.5 * float(np.linalg.norm(a.values - b.values))
        return float(2.0 * np.arcsin(min(half_chord, 1.0)))
    if isinstance(a, QuantileFunction):
        return _wasserstein_grid(a, b)
    if isinstance(a, DiscretePmf):
        if a.probabilities.shape != b.probabilities.shape:
            raise ShapeError("pmfs have different support sizes")
        diff = np.sqrt(a.probabilities) - np.sqrt(b.probabilities)
        return float(np.sqrt(np.sum(diff * diff) / 2.0))
    if isinstance(a, GaussianLocation):
        return float(np.hypot(a.mu - b.mu, a.sigma - b.sigma))
    raise IncompatibleResponseError(f"unsupported response type {type(a)!r}")


def bounded_transform(m: float) -> float:
    """Map a raw distance to [0, 1) via m / (1 + m)."""
    if m < 0:
        raise InvalidInputError("distance must be non-negative")
    return m / (1.0 + m)


def pairwise_distances(
    responses: Sequence[ResponseObject], apply_bound: bool = False
) -> np.ndarray:
    """n x n matrix of pairwise distances, optionally bounded-transformed."""
    n = len(responses)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            try:
                d = distance(responses[i], responses[j])
            except (IncompatibleResponseError, ShapeError) as exc:
                raise type(exc)(f"responses {i} and {j}: {exc}") from exc
            if apply_bound:
                d = bounded_transform(d)
            out[i, j] = out[j, i] = d
    return out


def response_to_json(r: ResponseObject) -> dict:
    """JSON-serializable record with a "type" tag; the CLI response format."""
    if isinstance(r, EuclideanVector):
        return {"type": "euclidean", "values": r.values.tolist()}
    if isinstance(r, SpherePoint):
        return {"type": "sphere", "values": r.values.tolist()}
    if isinstance(r, QuantileFunction):
        return {"type": "quantile", "grid": r.grid.tolist(), "values": r.values.tolist()}
    if isinstance(r, DiscretePmf):
        return {"type": "pmf", "probabilities": r.probabilities.tolist()}
    if isinstance(r, GaussianLocation):
        return {"type": "gaussian_loc", "mu": r.mu, "sigma": r.sigma}
    raise IncompatibleResponseError(f"unsupported response type {type(r)!r}")


def response_from_json(record: dict) -> ResponseObject:
    try:
        tag = record["type"]
    except (TypeError, KeyError) as exc:
        raise InvalidInputError("response record lacks a 'type' tag") from exc
    try:
        if tag == "euclidean":
            return EuclideanVector(record["values"])
        if tag == "sphere":
            return SpherePoint(record["values"])
        if tag == "quantile":
            return QuantileFunction(record["grid"], record["values"])
        if tag == "pmf":
            return DiscretePmf(record["probabilities"])
        if tag == "gaussian_loc":
            return GaussianLocation(float(record["mu"]), float(record["sigma"]))
    except KeyError as exc:
        raise InvalidInputError(f"response record missing field {exc}") from exc
    raise InvalidInputError(f"unknown response type {tag!r}")
