"""Empirical measures: data model, CSV ingestion, and reference samplers."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._rng import substream

__all__ = [
    "EmpiricalMeasure",
    "DistributionSpec",
    "MeasureFormatError",
    "empirical",
    "load_csv",
    "save_csv",
    "sample",
    "moment_gamma",
    "uniform_ball",
    "gaussian",
    "gaussian_mixture",
    "discrete",
    "construction_1d",
]


class MeasureFormatError(ValueError):
    """Raised when a CSV file or constructor input violates the measure contract."""


@dataclass(frozen=True)
class EmpiricalMeasure:
    """A weighted finite point set in R^d.

    ``points`` has shape (n, dim); ``weights`` is nonnegative and sums to 1.
    Instances are immutable and safe to share across threads.
    """

    points: np.ndarray
    weights: np.ndarray
    dim: int

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2:
            raise MeasureFormatError("points must be a 2-d array of shape (n, dim)")
        n, d = pts.shape
        if n < 1:
            raise MeasureFormatError("an empirical measure needs at least one point")
        if d != self.dim:
            raise MeasureFormatError(f"dimension mismatch: points have {d} columns, dim={self.dim}")
        if not np.all(np.isfinite(pts)):
            raise MeasureFormatError("non-finite value in points")
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        if w.shape != (n,):
            raise MeasureFormatError("weights must have one entry per point")
        if not np.all(np.isfinite(w)):
            raise MeasureFormatError("non-finite value in weights")
        if np.any(w < 0):
            raise MeasureFormatError("negative weight")
        if abs(w.sum() - 1.0) > 1e-12:
            raise MeasureFormatError(f"weights must sum to 1 (got {w.sum()!r})")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def scaled(self, c: float) -> "EmpiricalMeasure":
        """Coordinate scaling x -> c*x (weights unchanged)."""
        return EmpiricalMeasure(self.points * float(c), self.weights, self.dim)


def empirical(points, weights=None) -> EmpiricalMeasure:
    """Build an EmpiricalMeasure, defaulting to uniform weights."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if n < 1:
        raise MeasureFormatError("an empirical measure needs at least one point")
    if weights is None:
        weights = np.full(n, 1.0 / n)
    return EmpiricalMeasure(pts, np.asarray(weights, dtype=float), pts.shape[1])


def load_csv(path, expected_dim: int | None = None) -> EmpiricalMeasure:
    """Read a measure from CSV with header ``x0,...,x{d-1}[,w]``.

    Weights default to 1/n when no ``w`` column is present.  Each contract
    violation raises :class:`MeasureFormatError` with a distinct diagnostic.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MeasureFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        has_w = header and header[-1] == "w"
        coord_names = header[:-1] if has_w else header
        d = len(coord_names)
        if d < 1 or coord_names != [f"x{i}" for i in range(d)]:
            raise MeasureFormatError(f"{path}: malformed header {header!r}, expected x0..x{{d-1}}[,w]")
        if expected_dim is not None and d != expected_dim:
            raise MeasureFormatError(f"{path}: dimension mismatch, file has d={d}, expected {expected_dim}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MeasureFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise MeasureFormatError(f"{path}:{lineno}: unparsable numeric value") from None
    if not rows:
        raise MeasureFormatError(f"{path}: empty file (no data rows)")
    data = np.asarray(rows, dtype=float)
    pts = data[:, :d]
    if not np.all(np.isfinite(pts)):
        bad = int(np.argwhere(~np.isfinite(pts))[0][0])
        raise MeasureFormatError(f"{path}: non-finite value in row {bad + 2}")
    if has_w:
        w = data[:, d]
        if not np.all(np.isfinite(w)):
            raise MeasureFormatError(f"{path}: non-finite weight")
        if np.any(w < 0):
            raise MeasureFormatError(f"{path}: negative weight")
        if abs(w.sum() - 1.0) > 1e-12:
            raise MeasureFormatError(f"{path}: weights must sum to 1 (got {w.sum()!r})")
    else:
        w = np.full(len(pts), 1.0 / len(pts))
    return EmpiricalMeasure(pts, w, d)


def save_csv(m: EmpiricalMeasure, path, write_weights: bool | None = None) -> None:
    """Write a measure to CSV; ``load_csv`` recovers it exactly.

    Floats are written with shortest round-trip repr, so load(save(m)) == m
    bit for bit.  Row order is preserved.
    """
    if write_weights is None:
        write_weights = not m.uniform
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"x{i}" for i in range(m.dim)] + (["w"] if write_weights else [])
        writer.writerow(header)
        for i in range(m.n):
            row = [repr(float(v)) for v in m.points[i]]
            if write_weights:
                row.append(repr(float(m.weights[i])))
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Reference distributions


@dataclass(frozen=True)
class DistributionSpec:
    """A seedable reference distribution for experiments.

    ``kind`` is one of ``uniform-ball``, ``gaussian``, ``gaussian-mixture``,
    ``discrete`` or ``construction-1d``; ``params`` holds kind-specific
    parameters (validated at construction).
    """

    kind: str
    dim: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        p = self.params
        if self.kind == "uniform-ball":
            pass
        elif self.kind == "gaussian":
            mean = np.asarray(p.get("mean", np.zeros(self.dim)), dtype=float)
            if mean.shape != (self.dim,):
                raise ValueError("gaussian mean must have length dim")
            if not p.get("scale", 1.0) > 0:
                raise ValueError("gaussian scale must be > 0")
        elif self.kind == "gaussian-mixture":
            means = np.asarray(p["means"], dtype=float)
            wts = np.asarray(p["weights"], dtype=float)
            if means.ndim != 2 or means.shape[1] != self.dim:
                raise ValueError("mixture means must have shape (K, dim)")
            if wts.shape != (means.shape[0],) or np.any(wts < 0) or abs(wts.sum() - 1.0) > 1e-12:
                raise ValueError("mixture weights must lie on the simplex")
            if not p.get("scale", 1.0) > 0:
                raise ValueError("mixture scale must be > 0")
        elif self.kind == "discrete":
            support = np.asarray(p["support"], dtype=float)
            pmf = np.asarray(p["pmf"], dtype=float)
            if support.ndim != 2 or support.shape[1] != self.dim:
                raise ValueError("discrete support must have shape (k, dim)")
            if pmf.shape != (support.shape[0],) or np.any(pmf < 0) or abs(pmf.sum() - 1.0) > 1e-12:
                raise ValueError("pmf entries must be nonnegative and sum to 1")
        elif self.kind == "construction-1d":
            if self.dim != 1:
                raise ValueError("construction-1d is one-dimensional")
            if p.get("side", "p") not in ("p", "q"):
                raise ValueError("construction side must be 'p' or 'q'")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")


def uniform_ball(dim: int) -> DistributionSpec:
    return DistributionSpec("uniform-ball", dim)


def gaussian(dim: int, mean=None, scale: float = 1.0) -> DistributionSpec:
    mean = np.zeros(dim) if mean is None else np.asarray(mean, dtype=float)
    return DistributionSpec("gaussian", dim, {"mean": mean, "scale": float(scale)})


def gaussian_mixture(dim: int, means, weights, scale: float = 1.0) -> DistributionSpec:
    return DistributionSpec(
        "gaussian-mixture",
        dim,
        {"means": np.asarray(means, float), "weights": np.asarray(weights, float), "scale": float(scale)},
    )


def discrete(support, pmf) -> DistributionSpec:
    support = np.atleast_2d(np.asarray(support, dtype=float))
    return DistributionSpec("discrete", support.shape[1], {"support": support, "pmf": np.asarray(pmf, float)})


def construction_1d(beta: float, epsilon: float, side: str = "p") -> DistributionSpec:
    return DistributionSpec("construction-1d", 1, {"beta": float(beta), "epsilon": float(epsilon), "side": side})


def _sample_ball(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    # Normalized Gaussian direction times U^(1/d) radius: rejection-free in any d.
    z = rng.standard_normal((n, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z * rng.random(n)[:, None] ** (1.0 / d)


def sample(spec: DistributionSpec, n: int, seed: int) -> EmpiricalMeasure:
    """Draw n i.i.d. points; identical (spec, n, seed) gives identical output."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = substream(seed, "sample", spec.kind, spec.dim)
    p = spec.params
    if spec.kind == "uniform-ball":
        pts = _sample_ball(rng, n, spec.dim)
    elif spec.kind == "gaussian":
        pts = p.get("mean", np.zeros(spec.dim)) + p.get("scale", 1.0) * rng.standard_normal((n, spec.dim))
    elif spec.kind == "gaussian-mixture":
        means = np.asarray(p["means"], float)
        comps = rng.choice(len(means), size=n, p=np.asarray(p["weights"], float))
        pts = means[comps] + p.get("scale", 1.0) * rng.standard_normal((n, spec.dim))
    elif spec.kind == "discrete":
        support = np.asarray(p["support"], float)
        idx = rng.choice(len(support), size=n, p=np.asarray(p["pmf"], float))
        pts = support[idx]
    elif spec.kind == "construction-1d":
        from .spectral import build_construction_pair

        c = build_construction_pair(p["beta"], p["epsilon"])
        draw = c.sample_p if p.get("side", "p") == "p" else c.sample_q
        pts = draw(rng, n)[:, None]
    else:  # pragma: no cover - rejected at construction
        raise ValueError(spec.kind)
    return empirical(pts)


def moment_gamma(m: EmpiricalMeasure, gamma: float) -> float:
    """Weighted absolute moment sum_i w_i ||x_i||^gamma (gamma > 0)."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    norms = np.linalg.norm(m.points, axis=1)
    return float(np.dot(m.weights, norms**gamma))
