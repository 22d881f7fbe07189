"""Two-sample tests built from the library statistics, with permutation
calibration and the fixed threshold-schedule mode."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import substream
from .energy import GammaOrder, energy_sq_vstat
from .halfspace import dhbar_1d, dhbar_2d_exact, dhbar_heuristic, t_stat_dk
from .measures import DistributionSpec, EmpiricalMeasure, empirical, sample

__all__ = [
    "TestReport",
    "Statistic",
    "make_statistic",
    "permutation_test",
    "threshold_schedule",
    "threshold_test",
    "power_curve",
    "CurveRecord",
]


@dataclass(frozen=True)
class TestReport:
    statistic_name: str
    observed: float
    threshold: float
    p_value: float | None
    reject: bool
    n: int
    m: int
    seed: int
    permutations: int
    detail: str = ""


@dataclass(frozen=True)
class Statistic:
    """A named two-sample statistic with an optional batched 1-D fast path."""

    name: str
    compute: callable  # (EmpiricalMeasure, EmpiricalMeasure) -> float
    batch_1d: callable | None = None  # (zs, masks_sorted, n, m) -> (B+1,) values
    detail: str = ""


def _energy_batch_1d(zs, masks, n, m):
    cum = np.cumsum(np.where(masks, 1.0 / n, -1.0 / m), axis=1)
    dz = np.diff(zs)
    return 2.0 * np.einsum("ij,j->i", cum[:, :-1] ** 2, dz)


def _dhbar_batch_1d(zs, masks, n, m):
    cum = np.cumsum(np.where(masks, 1.0 / n, -1.0 / m), axis=1)
    return np.max(np.abs(cum), axis=1)


def make_statistic(
    kind: str,
    dim: int,
    gamma: float = 1.0,
    k: int = 0,
    n_dirs: int = 512,
    seed: int = 0,
) -> Statistic:
    """Build one of the supported statistics: energy(gamma), dhbar, t_dk(k).

    dhbar uses the exact sweep in d <= 2 and the random-direction heuristic
    (n_dirs directions) above; the report's detail field records which.
    """
    if kind == "energy":
        g = GammaOrder(gamma, dim)

        def compute(xm, ym):
            return energy_sq_vstat(xm, ym, g)

        batch = _energy_batch_1d if dim == 1 and gamma == 1.0 else None
        return Statistic(f"energy(gamma={gamma:g})", compute, batch)
    if kind == "dhbar":
        if dim == 1:
            return Statistic("dhbar", lambda xm, ym: dhbar_1d(xm, ym).value, _dhbar_batch_1d, detail="exact-1d")
        if dim == 2:
            return Statistic("dhbar", lambda xm, ym: dhbar_2d_exact(xm, ym).value, detail="exact-2d")
        return Statistic(
            "dhbar",
            lambda xm, ym: dhbar_heuristic(xm, ym, n_dirs, seed).value,
            detail=f"heuristic({n_dirs})",
        )
    if kind == "t_dk":
        return Statistic(
            f"t_d{k}",
            lambda xm, ym: t_stat_dk(xm, ym, k, n_dirs, seed),
            detail=f"n_dirs={n_dirs}",
        )
    raise ValueError(f"unknown statistic kind {kind!r}")


def permutation_test(
    x: EmpiricalMeasure,
    y: EmpiricalMeasure,
    statistic: Statistic,
    level: float = 0.05,
    B: int = 199,
    seed: int = 0,
) -> TestReport:
    """Pooled permutation test: p = (1 + #{perm >= observed}) / (B + 1).

    Requires uniform weights and B >= 99.  All relabelings come from the
    (seed, "permutation") substream, so the p-value does not depend on the
    statistic's implementation path as long as values agree pointwise.
    """
    if not (x.uniform and y.uniform):
        raise ValueError("permutation calibration requires uniform weights")
    if B < 99:
        raise ValueError("B must be >= 99")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    n, m = x.n, y.n
    N = n + m
    pooled = np.vstack([x.points, y.points])
    rng = substream(seed, "permutation")
    perms = np.empty((B, N), dtype=np.int64)
    for b in range(B):
        perms[b] = rng.permutation(N)

    can_batch = statistic.batch_1d is not None and pooled.shape[1] == 1
    if can_batch:
        z = pooled[:, 0]
        order = np.argsort(z, kind="stable")
        zs = z[order]
        if np.all(np.diff(zs) > 0):  # the fast path assumes distinct values
            rank = np.empty(N, dtype=np.int64)
            rank[order] = np.arange(N)
            masks = np.zeros((B + 1, N), dtype=bool)
            masks[0, rank[:n]] = True
            rows = np.repeat(np.arange(1, B + 1), n)
            masks[rows, rank[perms[:, :n]].ravel()] = True
            vals = statistic.batch_1d(zs, masks, n, m)
            observed, perm_vals = float(vals[0]), vals[1:]
            p = (1.0 + int(np.sum(perm_vals >= observed))) / (B + 1.0)
            return TestReport(statistic.name, observed, math.nan, p, p <= level, n, m, seed, B, statistic.detail)

    observed = float(statistic.compute(x, y))
    count = 0
    for b in range(B):
        xi = pooled[perms[b, :n]]
        yi = pooled[perms[b, n:]]
        if float(statistic.compute(empirical(xi), empirical(yi))) >= observed:
            count += 1
    p = (1.0 + count) / (B + 1.0)
    return TestReport(statistic.name, observed, math.nan, p, p <= level, n, m, seed, B, statistic.detail)


def threshold_schedule(n: int, exponent: float = 0.25) -> float:
    """t_n = n^(-exponent): vanishes while staying above the 1/sqrt(n) scale.

    The exponent must lie strictly inside (0, 1/2) so that t_n -> 0 and
    t_n sqrt(n) -> infinity.
    """
    if not 0.0 < exponent < 0.5:
        raise ValueError("exponent must lie strictly inside (0, 1/2)")
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(n) ** (-exponent)


def threshold_test(
    x: EmpiricalMeasure,
    y: EmpiricalMeasure,
    statistic: Statistic,
    exponent: float = 0.25,
    seed: int = 0,
) -> TestReport:
    """Fixed-threshold mode: reject when the statistic reaches t_n."""
    t_n = threshold_schedule(min(x.n, y.n), exponent)
    observed = float(statistic.compute(x, y))
    return TestReport(
        statistic.name, observed, t_n, None, observed >= t_n, x.n, y.n, seed, 0, statistic.detail
    )


@dataclass(frozen=True)
class CurveRecord:
    statistic: str
    n: int
    trials: int
    power: float
    mean_stat: float
    se_stat: float
    seed: int

    def to_row(self):
        return [self.statistic, self.n, self.trials, self.power, self.mean_stat, self.se_stat, self.seed]


def power_curve(
    spec_x: DistributionSpec,
    spec_y: DistributionSpec,
    statistics,
    n_list,
    trials: int,
    seed: int = 0,
    level: float = 0.05,
    B: int = 199,
) -> list[CurveRecord]:
    """Rejection frequency and mean statistic per sample size.

    Each (n, trial) pair draws fresh samples from its own substream; the
    permutation seed also derives from (seed, n, trial), so curves are
    reproducible and independent of evaluation order.
    """
    stats = list(statistics)
    records = []
    for n in n_list:
        rejections = np.zeros(len(stats))
        values = np.zeros((len(stats), trials))
        for t in range(trials):
            sx = sample(spec_x, n, _trial_seed(seed, n, t, 0))
            sy = sample(spec_y, n, _trial_seed(seed, n, t, 1))
            for si, stat in enumerate(stats):
                rep = permutation_test(sx, sy, stat, level=level, B=B, seed=_trial_seed(seed, n, t, 2))
                rejections[si] += rep.reject
                values[si, t] = rep.observed
        for si, stat in enumerate(stats):
            records.append(
                CurveRecord(
                    stat.name,
                    int(n),
                    trials,
                    float(rejections[si] / trials),
                    float(values[si].mean()),
                    float(values[si].std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
                    seed,
                )
            )
    return records


def _trial_seed(seed: int, n: int, trial: int, role: int) -> int:
    # fold the experiment coordinates into a derived integer seed
    return (int(seed) * 1_000_003 + int(n)) * 10_007 + int(trial) * 4 + int(role)
