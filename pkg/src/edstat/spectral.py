"""Fourier-side machinery: weighted spectral norms, the windowed-sine
construction with its closed-form transform, and scaling verification.

The base waveform is f(x) = 1{|x| <= pi} sin(r x) with integer frequency r;
f_b denotes f convolved with itself to b factors.  Its transform is

    fhat(w) = ((-1)^r / i) * 2 r sin(w pi) / (w^2 - r^2),

derived by direct integration; the integer constraint on r makes sin(w pi)
cancel the poles at w = +-r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve

from .energy import GammaOrder
from .util import SlopeFit, loglog_slope

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "GridResolutionError",
    "ConstructionError",
    "Construction1D",
    "SlopeReport",
    "fhat_construction",
    "fhat_construction_mag",
    "weighted_fourier_norm_sq",
    "build_construction_pair",
    "construction_energy",
    "construction_sobolev_norm",
    "verify_scaling",
    "energy_sq_fourier_1d",
]


class QuadratureError(RuntimeError):
    """Tolerance not met at maximum refinement."""


class GridResolutionError(RuntimeError):
    """Grid tabulation disagrees with the analytic spectrum."""


class ConstructionError(ValueError):
    """Invalid construction parameters (for example epsilon too large)."""


# ---------------------------------------------------------------------------
# Adaptive quadrature


@dataclass(frozen=True)
class QuadratureConfig:
    omega_max: float
    tol: float = 1e-8
    max_depth: int = 24
    tail_bound: Callable[[float], float] | None = None


def _adaptive_simpson(fn, edges_lo, edges_hi, tol, max_depth):
    """Adaptive Simpson over a batch of intervals, refined in vectorized waves.

    ``tol`` is relative to the integral's mass scale (the L1 sum of the
    first-pass panel estimates), allocated to panels proportionally to
    length.  Raises :class:`QuadratureError` only when the residual error of
    panels still open at maximum depth exceeds the budget.
    """
    a = np.asarray(edges_lo, dtype=float)
    b = np.asarray(edges_hi, dtype=float)
    total_len = float(np.sum(b - a))
    m = 0.5 * (a + b)
    fa, fm, fb = fn(a), fn(m), fn(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = max(float(np.sum(np.abs(whole))), 1e-300)
    acc = 0.0
    for depth in range(max_depth + 1):
        if len(a) == 0:
            return acc
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = fn(lm), fn(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        ok = np.abs(err) <= 15.0 * tol * scale * np.maximum(b - a, 1e-300) / total_len
        if depth == max_depth:
            residual = float(np.sum(np.abs(err[~ok]))) / 15.0
            if residual > tol * scale:
                raise QuadratureError(
                    f"{int(np.sum(~ok))} intervals unconverged at depth {max_depth} "
                    f"(residual {residual:.3e} vs budget {tol * scale:.3e})"
                )
            ok = np.ones_like(ok)
        acc += float(np.sum(left[ok] + right[ok] + err[ok] / 15.0))
        bad = ~ok
        if not bad.any():
            return acc
        # split the failing intervals
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        fa = np.concatenate([fa[bad], fm[bad]])
        fb = np.concatenate([fm[bad], fb[bad]])
        m = 0.5 * (a + b)
        fm = np.concatenate([flm[bad], frm[bad]])
        whole = np.concatenate([left[bad], right[bad]])
    return acc


def weighted_fourier_norm_sq(fhat, exponent_t: float, quad: QuadratureConfig):
    """Integral over R of |fhat(w)|^2 |w|^(2t), by adaptive Simpson on [0, W].

    The integrand is even, so the positive half-axis is doubled.  The first
    unit panel uses the substitution w = u^4 to soften the |w|^(2t) endpoint
    for negative t.  Returns ``(value, tail_bound)`` where the tail bound
    comes from ``quad.tail_bound`` (0.0 when absent).
    """
    t = float(exponent_t)

    def integrand(w):
        w = np.asarray(w, dtype=float)
        mag = np.abs(np.asarray(fhat(w)))
        out = np.zeros_like(w)
        pos = w > 0
        out[pos] = mag[pos] ** 2 * w[pos] ** (2.0 * t)
        return out

    def integrand_sub(u):
        # w = u^4, dw = 4 u^3 du
        u = np.asarray(u, dtype=float)
        return integrand(u**4) * 4.0 * u**3

    W = float(quad.omega_max)
    if W <= 0:
        raise ValueError("omega_max must be positive")
    head_hi = min(1.0, W)
    head = _adaptive_simpson(integrand_sub, np.array([0.0]), np.array([head_hi ** 0.25]), quad.tol / 2.0, quad.max_depth)
    body = 0.0
    if W > 1.0:
        edges = np.arange(1.0, math.floor(W) + 1.0)
        if edges[-1] < W:
            edges = np.append(edges, W)
        body = _adaptive_simpson(integrand, edges[:-1], edges[1:], quad.tol / 2.0, quad.max_depth)
    tail = float(quad.tail_bound(W)) if quad.tail_bound is not None else 0.0
    return 2.0 * (head + body), 2.0 * tail


# ---------------------------------------------------------------------------
# The windowed-sine construction


def _fhat_single(omega, r: int):
    """Closed-form transform of 1{|x|<=pi} sin(rx), complex-valued.

    Within |w -+ r| < 1/2 the sinc form 2 r pi sinc(w -+ r)/(w +- r) is used;
    it is exact (sin(w pi) = (-1)^r sin((w - r) pi) for integer r) and stays
    well conditioned through the removable singularity.
    """
    w = np.asarray(omega, dtype=float)
    aw = np.abs(w)
    dw = aw - r
    near = np.abs(dw) < 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = 2.0 * r * np.sin(w * np.pi) / (w * w - float(r) * r)
        direct = np.where(np.isfinite(direct), direct, 0.0)
    guarded = np.sign(w) * 2.0 * r * np.pi * np.sinc(dw) / (aw + r)
    mag = np.where(near, guarded, direct)
    phase = (-1.0) ** (r % 2) / 1j
    return phase * mag


def fhat_construction(c: "Construction1D", omega):
    """Transform of the construction waveform f_{beta_bar} at frequency omega."""
    return _fhat_single(omega, c.r) ** c.beta_bar


def fhat_construction_mag(omega, r: int, beta_bar: int = 1):
    """|fhat|^beta_bar without the phase factor (cheaper, always real)."""
    return np.abs(_fhat_single(omega, r)) ** beta_bar


def _tail_bound_factory(r: int, beta_bar: int, t: float):
    # |fhat(w)| <= (8/3) r / w^2 for w >= 2r
    c = (8.0 / 3.0) * r

    def tail(W: float) -> float:
        p = 4.0 * beta_bar - 2.0 * t - 1.0
        if p <= 0:
            return math.inf
        return c ** (2 * beta_bar) * W ** (-p) / p

    return tail


def _f_beta_grid(r: int, beta_bar: int, osc_samples: int = 32):
    """Tabulate f_{beta_bar} on [-beta_bar pi, beta_bar pi] by FFT convolution."""
    h = np.pi / (osc_samples * r)
    n = 2 * osc_samples * r + 1
    x = np.linspace(-np.pi, np.pi, n)
    h = x[1] - x[0]
    f = np.sin(r * x)
    g = f
    for _ in range(beta_bar - 1):
        g = fftconvolve(g, f) * h
    xg = np.linspace(-beta_bar * np.pi, beta_bar * np.pi, len(g))
    return xg, g, h


@dataclass(frozen=True)
class SlopeReport:
    quantity: str
    slope: float
    stderr: float
    r_list: tuple
    values: tuple

    def to_record(self) -> dict:
        return {
            "quantity": self.quantity,
            "slope": self.slope,
            "stderr": self.stderr,
            "r_list": list(self.r_list),
            "values": list(self.values),
        }


@dataclass(frozen=True)
class Construction1D:
    """The adversarial density pair (p_eps, q_eps) tabulated on a grid.

    p_eps = p0 + (eps kappa / 2) f_bb(bb x), q_eps the mirror image, where
    kappa = 1/||f_bb||_inf so the perturbation has peak eps/2, and p0 is a
    fixed smooth bump supported on |x| < B with B = bb pi + 1.  The waveform
    grid and the density grid share aligned nodes, so the tabulated
    perturbation is exact up to the convolution quadrature.
    """

    r: int
    beta_bar: int
    epsilon: float
    beta: float
    kappa: float
    amplitude: float          # eps * kappa, the coefficient of f_bb(bb x) in p - q
    x: np.ndarray             # density grid
    p: np.ndarray
    q: np.ndarray
    p0: np.ndarray
    xg: np.ndarray            # waveform grid (argument of f_bb)
    fg: np.ndarray
    tv: float
    _cdf_p: np.ndarray = field(repr=False, default=None)
    _cdf_q: np.ndarray = field(repr=False, default=None)

    def _sample(self, cdf, rng, n: int) -> np.ndarray:
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        return np.interp(rng.random(n), cdf[keep], self.x[keep])

    def sample_p(self, rng, n: int) -> np.ndarray:
        return self._sample(self._cdf_p, rng, n)

    def sample_q(self, rng, n: int) -> np.ndarray:
        return self._sample(self._cdf_q, rng, n)

    def cdf_p(self, t) -> np.ndarray:
        return np.interp(t, self.x, self._cdf_p, left=0.0, right=1.0)

    def cdf_q(self, t) -> np.ndarray:
        return np.interp(t, self.x, self._cdf_q, left=0.0, right=1.0)

    def dhbar_exact(self) -> float:
        """max_b |cumulative integral of p - q| (valid because the waveform
        integrates to zero)."""
        h = self.xg[1] - self.xg[0]
        F = np.cumsum(self.fg) * h
        return self.amplitude / self.beta_bar * float(np.max(np.abs(F)))


def _grid_cdf(x, dens):
    steps = np.diff(x) * 0.5 * (dens[1:] + dens[:-1])
    cdf = np.concatenate([[0.0], np.cumsum(steps)])
    return cdf / cdf[-1]


def build_construction_pair(beta: float, epsilon: float, osc_samples: int = 32) -> Construction1D:
    """Build the density pair for smoothness beta at separation epsilon.

    Uses r = ceil(eps^(-1/beta)) and beta_bar = ceil(beta) + 1 convolution
    factors.  Raises :class:`ConstructionError` when epsilon is too large for
    the densities to stay nonnegative.
    """
    if not 0.0 < epsilon < 1.0:
        raise ConstructionError("epsilon must lie in (0, 1)")
    if beta <= 0:
        raise ConstructionError("beta must be positive")
    bb = int(math.ceil(beta)) + 1
    r = int(math.ceil(epsilon ** (-1.0 / beta)))
    xg, fg, h = _f_beta_grid(r, bb, osc_samples)
    if abs(float(np.trapezoid(fg, xg))) > 1e-8:
        raise GridResolutionError("waveform does not integrate to zero on the grid")
    kappa = 1.0 / float(np.max(np.abs(fg)))
    amplitude = epsilon * kappa

    # density grid aligned with the waveform grid: bb * x_j lands on xg nodes
    delta = h / bb
    B = bb * np.pi + 1.0
    K = int(math.ceil(B / delta))
    x = (np.arange(2 * K + 1) - K) * delta
    u = x / B
    with np.errstate(divide="ignore", over="ignore"):
        p0 = np.where(np.abs(u) < 1.0, np.exp(-1.0 / np.maximum(1.0 - u * u, 1e-12)), 0.0)
    p0 /= np.trapezoid(p0, x)

    idx = np.arange(2 * K + 1) - K + (len(fg) - 1) // 2  # index of bb*x_j in xg
    pert = np.zeros_like(x)
    valid = (idx >= 0) & (idx < len(fg))
    pert[valid] = fg[idx[valid]]
    pert *= 0.5 * amplitude

    p = p0 + pert
    q = p0 - pert
    if p.min() < -1e-12 or q.min() < -1e-12:
        raise ConstructionError(
            f"epsilon={epsilon} too large: densities reach {min(p.min(), q.min()):.3e}"
        )
    p = np.maximum(p, 0.0)
    q = np.maximum(q, 0.0)
    for dens in (p, q):
        mass = float(np.trapezoid(dens, x))
        if abs(mass - 1.0) > 1e-8:
            raise GridResolutionError(f"density integrates to {mass!r}")
    tv = 0.5 * float(np.trapezoid(np.abs(p - q), x))

    # self-check: grid Parseval against the analytic spectrum
    quad = QuadratureConfig(omega_max=64.0 * r, tol=1e-8, tail_bound=_tail_bound_factory(r, bb, 0.0))
    spectral, _ = weighted_fourier_norm_sq(lambda w: fhat_construction_mag(w, r, bb), 0.0, quad)
    grid_l2 = float(np.trapezoid(fg * fg, xg))
    if abs(grid_l2 - spectral / (2.0 * np.pi)) > 1e-3 * max(grid_l2, 1e-300):
        raise GridResolutionError(
            f"grid/spectral L2 mismatch: {grid_l2!r} vs {spectral / (2 * np.pi)!r}"
        )

    c = Construction1D(
        r=r,
        beta_bar=bb,
        epsilon=float(epsilon),
        beta=float(beta),
        kappa=kappa,
        amplitude=amplitude,
        x=x,
        p=p,
        q=q,
        p0=p0,
        xg=xg,
        fg=fg,
        tv=tv,
        _cdf_p=_grid_cdf(x, p),
        _cdf_q=_grid_cdf(x, q),
    )
    return c


def _fhat_pair_diff_mag(c: Construction1D):
    """|transform of p - q| = amplitude/bb * |fhat(w/bb)|^bb."""

    def mag(w):
        return c.amplitude / c.beta_bar * fhat_construction_mag(np.asarray(w, float) / c.beta_bar, c.r, c.beta_bar)

    return mag


def construction_energy(c: Construction1D, g: GammaOrder, tol: float = 1e-8) -> float:
    """E_gamma(p_eps, q_eps) through the spectral form (dim 1)."""
    if g.dim != 1:
        raise ValueError("construction energies are one-dimensional")
    t = -(1.0 + g.gamma) / 2.0
    W = 64.0 * c.r * c.beta_bar
    quad = QuadratureConfig(omega_max=W, tol=tol)
    val, _ = weighted_fourier_norm_sq(_fhat_pair_diff_mag(c), t, quad)
    return math.sqrt(g.F * val)


def construction_sobolev_norm(c: Construction1D, beta: float, tol: float = 1e-8) -> float:
    """Homogeneous Sobolev seminorm ||p_eps - q_eps||_{beta,2}."""
    W = 64.0 * c.r * c.beta_bar
    quad = QuadratureConfig(omega_max=W, tol=tol)
    val, _ = weighted_fourier_norm_sq(_fhat_pair_diff_mag(c), beta, quad)
    return math.sqrt(val)


def verify_scaling(beta_bar: int, t: float, r_list, tol: float = 1e-8, osc_samples: int = 32):
    """Slope report for the waveform family over increasing frequencies.

    For each r computes the weighted spectral norm ||f_bb||_{t,2} by
    quadrature, ||f_bb||_1 on the grid, and the ray discrepancy
    max_b |int_{-inf}^b f_bb| from the grid cumulative sum, then regresses
    each on r in log-log coordinates.  Expected slopes: t, 0, -1.
    """
    r_list = [int(r) for r in r_list]
    if len(r_list) < 4 or any(b <= a for a, b in zip(r_list, r_list[1:])):
        raise ValueError("r_list must be strictly increasing with at least 4 entries")
    if r_list[-1] < 10 * r_list[0]:
        raise ValueError("r_list should span at least one decade")
    norms, l1s, dhs = [], [], []
    for r in r_list:
        quad = QuadratureConfig(omega_max=64.0 * r, tol=tol, tail_bound=_tail_bound_factory(r, beta_bar, t))
        val, _ = weighted_fourier_norm_sq(lambda w: fhat_construction_mag(w, r, beta_bar), t, quad)
        norms.append(math.sqrt(val))
        xg, fg, h = _f_beta_grid(r, beta_bar, osc_samples)
        l1s.append(float(np.sum(np.abs(fg)) * h))
        dhs.append(float(np.max(np.abs(np.cumsum(fg) * h))))

    def report(name, values) -> SlopeReport:
        fit: SlopeFit = loglog_slope(r_list, values)
        return SlopeReport(name, fit.slope, fit.stderr, tuple(r_list), tuple(values))

    return [
        report(f"weighted_norm(t={t:g})", norms),
        report("l1_norm", l1s),
        report("ray_discrepancy", dhs),
    ]


# ---------------------------------------------------------------------------
# Spectral route to the energy distance between small empirical measures


def energy_sq_fourier_1d(mu, nu, g: GammaOrder, omega_max: float = 8192.0, tol: float = 1e-9) -> float:
    """E_gamma^2 between 1-D empirical measures via characteristic functions.

    Numerically integrates F_gamma(1) |mu_hat - nu_hat|^2 |w|^-(1+gamma).
    The non-decaying mean level A0 = sum of squared merged weights is handled
    with its exact tail integral beyond omega_max.  Exists as an independent
    cross-check of the pairwise statistic; O(n) per quadrature node.
    """
    if g.dim != 1 or mu.dim != 1 or nu.dim != 1:
        raise ValueError("energy_sq_fourier_1d requires one-dimensional measures")
    z = np.concatenate([mu.points[:, 0], nu.points[:, 0]])
    cw = np.concatenate([mu.weights, -nu.weights])
    # merge exactly coincident atoms so A0 reflects the true mean level
    order = np.argsort(z, kind="stable")
    z, cw = z[order], cw[order]
    starts = np.concatenate([[True], z[1:] != z[:-1]])
    group = np.cumsum(starts) - 1
    zed = z[starts]
    c = np.zeros(group[-1] + 1)
    np.add.at(c, group, cw)
    a0 = float(c @ c)

    def diff_sq(w):
        ph = np.exp(-1j * np.outer(w, zed))
        return np.abs(ph @ c) ** 2

    def integrand(w):
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        pos = w > 0
        out[pos] = diff_sq(w[pos]) * w[pos] ** (-(1.0 + g.gamma))
        return out

    def integrand_sub(u):
        u = np.asarray(u, dtype=float)
        return integrand(u**4) * 4.0 * u**3

    head = _adaptive_simpson(integrand_sub, np.array([0.0]), np.array([1.0]), tol, 26)
    edges = np.arange(1.0, math.floor(omega_max) + 1.0)
    if edges[-1] < omega_max:
        edges = np.append(edges, omega_max)
    body = _adaptive_simpson(integrand, edges[:-1], edges[1:], tol, 26)
    # beyond omega_max, |Delta|^2 oscillates around its mean level A0; the
    # oscillating remainder integrates with cancellation, the mean exactly
    a0_tail = a0 * omega_max ** (-g.gamma) / g.gamma
    return g.F * 2.0 * (head + body + a0_tail)
