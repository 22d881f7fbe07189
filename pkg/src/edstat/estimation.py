"""Minimum-energy estimation: SGD over parametric generators, the
codeword-embedded discrete estimator, and the training stopping rule."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import substream
from .energy import GammaOrder, _pair_pow_sum, energy_sq_vstat, grad_energy_sq
from .measures import EmpiricalMeasure, empirical

__all__ = [
    "GeneratorModel",
    "Codebook",
    "StoppingConfig",
    "FitResult",
    "FitDivergedError",
    "CodebookError",
    "DiscreteFit",
    "StopReport",
    "gaussian_mixture_model",
    "affine_model",
    "fit_min_energy_sgd",
    "energy_grad_theta",
    "build_codebook",
    "fit_discrete_simplex",
    "simplex_project",
    "stopping_verifier",
    "gamma_schedule",
]


class FitDivergedError(RuntimeError):
    def __init__(self, step: int, value: float):
        super().__init__(f"non-finite loss at step {step} (value {value!r})")
        self.step = step


class CodebookError(RuntimeError):
    def __init__(self, achieved: float, target: float, dim: int):
        super().__init__(
            f"could not certify min distance {target} (achieved {achieved:.4f} at dim {dim})"
        )
        self.achieved = achieved


@dataclass(frozen=True)
class GeneratorModel:
    """Parametric pushforward sampler with a pathwise parameter Jacobian.

    Kinds:

    * ``gaussian-mixture``: theta = [logits (K), means (K*dim)], unit
      covariance.  Component choice is inverse-CDF on softmax(logits) with a
      per-sample uniform; the choice is piecewise constant in the logits, so
      their pathwise Jacobian is zero almost everywhere (the means carry the
      gradient signal).
    * ``pushforward-affine``: theta = [A (dim*dim, row-major), offset (dim)]
      applied to standard Gaussian noise.
    """

    kind: str
    dim: int
    components: int
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).copy()
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        if self.kind == "gaussian-mixture":
            expect = self.components + self.components * self.dim
        elif self.kind == "pushforward-affine":
            expect = self.dim * self.dim + self.dim
        else:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if theta.shape != (expect,):
            raise ValueError(f"theta must have length {expect} for {self.kind}")

    @property
    def n_params(self) -> int:
        return self.theta.shape[0]

    def with_theta(self, theta) -> "GeneratorModel":
        return replace(self, theta=np.asarray(theta, dtype=float))

    def _mixture_parts(self):
        K = self.components
        logits = self.theta[:K]
        means = self.theta[K:].reshape(K, self.dim)
        return logits, means

    def softmax_weights(self) -> np.ndarray:
        logits, _ = self._mixture_parts()
        e = np.exp(logits - logits.max())
        return e / e.sum()

    def sample(self, m: int, seed_or_rng) -> np.ndarray:
        pts, _ = self.sample_with_jacobian(m, seed_or_rng, want_jacobian=False)
        return pts

    def sample_with_jacobian(self, m: int, seed_or_rng, want_jacobian: bool = True):
        """Draw m points; Jacobian has shape (m, dim, n_params)."""
        rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else substream(seed_or_rng, "generator", self.kind)
        d, P = self.dim, self.n_params
        if self.kind == "pushforward-affine":
            A = self.theta[: d * d].reshape(d, d)
            off = self.theta[d * d :]
            z = rng.standard_normal((m, d))
            pts = z @ A.T + off
            if not want_jacobian:
                return pts, None
            jac = np.zeros((m, d, P))
            for p_ in range(d):
                jac[:, p_, p_ * d : (p_ + 1) * d] = z  # d x_p / d A[p, :] = z
            jac[:, :, d * d :] = np.eye(d)
            return pts, jac
        K = self.components
        logits, means = self._mixture_parts()
        w = self.softmax_weights()
        cdf = np.cumsum(w)
        u = rng.random(m)
        comp = np.searchsorted(cdf, u, side="right").clip(0, K - 1)
        z = rng.standard_normal((m, d))
        pts = means[comp] + z
        if not want_jacobian:
            return pts, None
        jac = np.zeros((m, d, P))
        rows = np.arange(m)
        for a in range(d):
            jac[rows, a, K + comp * d + a] = 1.0  # d x_a / d mean[comp, a]
        # logits: component choice is a step function of theta -> zero a.e.
        return pts, jac


def gaussian_mixture_model(dim: int, components: int, logits=None, means=None) -> GeneratorModel:
    logits = np.zeros(components) if logits is None else np.asarray(logits, float)
    means = np.zeros((components, dim)) if means is None else np.asarray(means, float)
    theta = np.concatenate([logits, means.reshape(-1)])
    return GeneratorModel("gaussian-mixture", dim, components, theta)


def affine_model(dim: int, matrix=None, offset=None) -> GeneratorModel:
    matrix = np.eye(dim) if matrix is None else np.asarray(matrix, float)
    offset = np.zeros(dim) if offset is None else np.asarray(offset, float)
    theta = np.concatenate([matrix.reshape(-1), offset])
    return GeneratorModel("pushforward-affine", dim, 0, theta)


def energy_grad_theta(model: GeneratorModel, data: EmpiricalMeasure, g: GammaOrder, m: int, rng) -> tuple[float, np.ndarray]:
    """Loss E_gamma^2(model_m, data) and its pathwise parameter gradient for
    one batch drawn from ``rng``."""
    pts, jac = model.sample_with_jacobian(m, rng)
    batch = empirical(pts)
    loss = energy_sq_vstat(batch, data, g)
    gpts = grad_energy_sq(pts, data, g)
    grad = np.einsum("sdp,sd->p", jac, gpts)
    return loss, grad


def _fd_jacobian_check(model: GeneratorModel, seed: int, m: int = 8, h: float = 1e-6, rtol: float = 1e-5) -> None:
    """Sampler Jacobian against central finite differences on a frozen seed."""
    base = model.theta.copy()
    _, jac = model.sample_with_jacobian(m, substream(seed, "jac-check"))
    fd = np.zeros_like(jac)
    for p_ in range(model.n_params):
        tp = base.copy()
        tp[p_] += h
        up = model.with_theta(tp).sample(m, substream(seed, "jac-check"))
        tm = base.copy()
        tm[p_] -= h
        um = model.with_theta(tm).sample(m, substream(seed, "jac-check"))
        fd[:, :, p_] = (up - um) / (2 * h)
    scale = max(1.0, float(np.max(np.abs(jac))))
    if not np.allclose(jac, fd, atol=rtol * scale, rtol=rtol):
        raise RuntimeError("sampler Jacobian disagrees with finite differences at startup")


@dataclass(frozen=True)
class FitResult:
    model: GeneratorModel
    trace: np.ndarray  # per-step batch loss E_gamma^2
    steps: int
    learning_rate: float
    batch_m: int
    seed: int


def fit_min_energy_sgd(
    data: EmpiricalMeasure,
    model: GeneratorModel,
    g: GammaOrder,
    steps: int = 500,
    batch_m: int = 64,
    learning_rate: float = 0.1,
    seed: int = 0,
    jacobian_check: bool = True,
) -> FitResult:
    """Plain constant-step SGD on theta against the batch energy loss.

    Each step draws ``batch_m`` fresh generator samples from the
    (seed, step) substream, backpropagates the location gradient through the
    sampler Jacobian, and takes one gradient step.  The trace is bit-for-bit
    reproducible for a fixed seed.
    """
    if model.dim != data.dim or g.dim != data.dim:
        raise ValueError("model, data and gamma order dimensions must agree")
    if batch_m < 2:
        raise ValueError("batch_m must be >= 2")
    if jacobian_check:
        _fd_jacobian_check(model, seed)
    theta = model.theta.copy()
    trace = np.empty(steps)
    cur = model
    # the within-data term of the V-statistic is constant across steps
    self_data = _pair_pow_sum(data.points, data.weights, data.points, data.weights, g.gamma)
    wb = np.full(batch_m, 1.0 / batch_m)
    for step in range(steps):
        rng = substream(seed, "sgd-step", step)
        pts, jac = cur.sample_with_jacobian(batch_m, rng)
        cross = _pair_pow_sum(pts, wb, data.points, data.weights, g.gamma)
        self_batch = _pair_pow_sum(pts, wb, pts, wb, g.gamma)
        loss = max(2.0 * cross - self_batch - self_data, 0.0)
        grad = np.einsum("sdp,sd->p", jac, grad_energy_sq(pts, data, g))
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise FitDivergedError(step, loss)
        trace[step] = loss
        theta = theta - learning_rate * grad
        cur = cur.with_theta(theta)
    return FitResult(cur, trace, steps, learning_rate, batch_m, seed)


# ---------------------------------------------------------------------------
# Discrete estimation on a codebook embedding


@dataclass(frozen=True)
class Codebook:
    """k codewords on the scaled hypercube {+-1/sqrt(d')}^{d'} with a
    certified minimum pairwise Euclidean distance."""

    codewords: np.ndarray
    min_dist: float
    seed: int

    def __post_init__(self):
        cw = np.asarray(self.codewords, dtype=float).copy()
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def k(self) -> int:
        return self.codewords.shape[0]

    @property
    def dim(self) -> int:
        return self.codewords.shape[1]


def _min_pairwise_dist(C: np.ndarray) -> float:
    best = math.inf
    for i in range(len(C) - 1):
        d = np.linalg.norm(C[i + 1 :] - C[i], axis=1)
        best = min(best, float(d.min()))
    return best


def build_codebook(k: int, delta_target: float = 1.0, seed: int = 0, max_retries: int = 8) -> Codebook:
    """Random sign codebook with certified minimum distance.

    Starts at d' = ceil(4 ln k) and doubles the blocklength (resampling) up
    to ``max_retries`` times until the minimum pairwise distance reaches
    ``delta_target``.  Hamming distance h gives Euclidean 2 sqrt(h/d'), so
    delta_target = 1 asks for h >= d'/4; random codes achieve this at
    logarithmic blocklength.  Every codeword has norm exactly 1.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if not 0.0 < delta_target < math.sqrt(2.0):
        raise ValueError("delta_target must lie in (0, sqrt(2))")
    dprime = max(1, int(math.ceil(4.0 * math.log(k))))
    achieved = 0.0
    for attempt in range(max_retries + 1):
        rng = substream(seed, "codebook", k, attempt)
        C = rng.choice([-1.0, 1.0], size=(k, dprime)) / math.sqrt(dprime)
        dmin = _min_pairwise_dist(C)
        achieved = max(achieved, dmin)
        if dmin >= delta_target and dmin > 0.0:
            return Codebook(C, dmin, seed)
        dprime *= 2
    raise CodebookError(achieved, delta_target, dprime)


def simplex_project(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    a = -np.sort(-v)
    cssv = (np.cumsum(a) - 1.0) / np.arange(1, len(v) + 1)
    rho = np.nonzero(a > cssv)[0][-1]
    return np.maximum(v - cssv[rho], 0.0)


@dataclass(frozen=True)
class DiscreteFit:
    pmf: np.ndarray
    objective: float
    fw_gap: float
    iterations: int
    converged: bool


def fit_discrete_simplex(
    counts,
    cb: Codebook,
    support: np.ndarray | None = None,
    max_iter: int = 5000,
    gap_tol: float = 1e-10,
) -> DiscreteFit:
    """Minimize the embedded squared energy distance to the empirical pmf.

    The objective is q(w) = -(w' D w) with w = pmf - empirical and D the
    codeword distance matrix; it is convex along zero-sum directions, so
    projected gradient descent with a 1/L step converges.  ``support``
    restricts the pmf to a subset of symbols.  Unconstrained, the empirical
    pmf itself is the global minimizer (objective 0).
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 1 or counts.shape[0] != cb.k:
        raise ValueError("counts must be a length-k histogram")
    if counts.sum() < 1:
        raise ValueError("counts must sum to at least 1")
    emp = counts / counts.sum()
    C = cb.codewords
    D = np.linalg.norm(C[:, None, :] - C[None, :, :], axis=2)
    mask = np.zeros(cb.k, dtype=bool)
    if support is None:
        mask[:] = True
    else:
        mask[np.asarray(support, dtype=int)] = True
        if not mask.any():
            raise ValueError("support must be nonempty")
    L = 2.0 * float(np.linalg.eigvalsh(D)[-1].__abs__())
    idx = np.flatnonzero(mask)
    x = np.zeros(cb.k)
    x[idx] = 1.0 / len(idx)

    def objective(xv):
        w = xv - emp
        return -float(w @ D @ w)

    def gradient(xv):
        return -2.0 * (D @ (xv - emp))

    gap = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        grad = gradient(x)
        # Frank-Wolfe gap over the restricted simplex
        gap = float(grad @ x - grad[idx].min())
        if gap < gap_tol:
            return DiscreteFit(x, objective(x), gap, it, True)
        step = x[idx] - grad[idx] / L
        xn = np.zeros(cb.k)
        xn[idx] = simplex_project(step)
        x = xn
    return DiscreteFit(x, objective(x), gap, it, False)


# ---------------------------------------------------------------------------
# Stopping criterion


@dataclass(frozen=True)
class StoppingConfig:
    """Verifier schedule: candidate k receives m_k generator draws with
    m_k = ceil(c_cal n log(k^2/delta) / log(1/delta)), nondecreasing in k."""

    n: int
    delta: float
    gamma: GammaOrder
    c_cal: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.c_cal <= 0:
            raise ValueError("c_cal must be positive")

    def m_k(self, k: int) -> int:
        if k < 1:
            raise ValueError("candidate index starts at 1")
        num = math.log((k * k) / self.delta)
        den = math.log(1.0 / self.delta)
        return int(math.ceil(self.c_cal * self.n * num / den))


def gamma_schedule(n: int, kind: str = "1/log n") -> float:
    """Preset adaptive exponents: gamma(n) in {1, 1/log n, 1/log log n}."""
    if kind == "1":
        return 1.0
    if kind == "1/log n":
        return min(1.0, 1.0 / math.log(max(n, 3)))
    if kind == "1/log log n":
        return min(1.0, 1.0 / math.log(math.log(max(n, 16))))
    raise ValueError(f"unknown gamma schedule {kind!r}")


@dataclass(frozen=True)
class StopReport:
    stopped: bool
    k_star: int | None
    certificate: float | None
    threshold: float
    values: tuple
    m_schedule: tuple
    exhausted: bool


def stopping_verifier(
    data: EmpiricalMeasure,
    candidates,
    cfg: StoppingConfig,
    threshold_tau: float,
    seed: int = 0,
    max_candidates: int | None = None,
) -> StopReport:
    """Walk the candidate stream and stop at the first certified model.

    For candidate k the verifier draws m_k samples, computes the energy
    distance sqrt(E_gamma^2) to the training sample, and stops when it falls
    below tau * sqrt(log(1/delta)/n).  Exhausting the stream is reported,
    not raised.
    """
    thresh = threshold_tau * math.sqrt(math.log(1.0 / cfg.delta) / cfg.n)
    values = []
    schedule = []
    for k, cand in enumerate(candidates, start=1):
        if max_candidates is not None and k > max_candidates:
            break
        m = cfg.m_k(k)
        schedule.append(m)
        rng = substream(seed, "stopping", k)
        pts = cand.sample(m, rng) if isinstance(cand, GeneratorModel) else cand(rng, m)
        value = math.sqrt(energy_sq_vstat(empirical(pts), data, cfg.gamma))
        values.append(value)
        if value <= thresh:
            return StopReport(True, k, value, thresh, tuple(values), tuple(schedule), False)
    return StopReport(False, None, None, thresh, tuple(values), tuple(schedule), True)
