"""Small shared numerics: log-log regression and blocked map helpers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SlopeFit", "loglog_slope"]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    intercept: float


def loglog_slope(x, y) -> SlopeFit:
    """OLS slope of log y on log x with its standard error."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ValueError("need at least two points for a slope")
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    dof = max(lx.size - 2, 1)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    stderr = float(np.sqrt(resid @ resid / dof / sxx)) if sxx > 0 else float("inf")
    return SlopeFit(float(coef[0]), stderr, float(coef[1]))
