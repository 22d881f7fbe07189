import math

import numpy as np
import pytest

from edstat.energy import (
    GammaOrder,
    constants,
    energy_sq_mmd,
    energy_sq_ustat,
    energy_sq_vstat,
    grad_energy_sq,
    kernel_gamma,
)
from edstat.measures import empirical, sample, uniform_ball
from edstat.sliced import energy_sq_1d_exact, project_pair


def rand_measure(rng, n, d, weighted=False):
    w = rng.dirichlet(np.ones(n)) if weighted else None
    return empirical(rng.normal(size=(n, d)), w)


def test_gamma_order_validation():
    for bad in (0.0, 2.0, -0.3, 2.5):
        with pytest.raises(ValueError):
            GammaOrder(bad, 2)
    g = GammaOrder(1.3, 4)
    assert g.F > 0


def test_constants_reference_values():
    g = GammaOrder(1.0, 1)
    assert constants(g, "F") == pytest.approx(1 / math.pi, rel=1e-14)
    assert constants(g, "Cpsi") == pytest.approx(1 / math.pi, rel=1e-14)
    assert constants(g, "dH_factor") == pytest.approx(1.0, rel=1e-14)
    g2 = GammaOrder(1.0, 2)
    assert constants(g2, "S") == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(ValueError):
        constants(g, "nope")


def test_kernel_examples():
    g = GammaOrder(1.0, 2)
    y = np.array([3.0, 4.0])
    assert kernel_gamma(np.zeros(2), y, g) == pytest.approx(0.0, abs=1e-15)
    assert kernel_gamma(y, y, g) == pytest.approx(2 * 5.0, rel=1e-15)
    assert kernel_gamma(np.array([1.0, 0.0]), np.array([0.0, 1.0]), g) == pytest.approx(
        2 - math.sqrt(2), rel=1e-14
    )
    with pytest.raises(ValueError):
        kernel_gamma(np.zeros(3), y, g)


def test_vstat_examples():
    g = GammaOrder(1.0, 1)
    m = empirical([[0.0], [2.0]])
    assert energy_sq_vstat(m, m, g) == 0.0
    g2 = GammaOrder(1.0, 2)
    a = empirical([[0.0, 0.0]])
    b = empirical([[1.0, 0.0]])
    assert energy_sq_vstat(a, b, g2) == pytest.approx(2.0, rel=1e-15)
    assert energy_sq_vstat(m, empirical([[1.0]]), g) == pytest.approx(1.0, rel=1e-14)


def test_ustat_examples():
    g = GammaOrder(1.0, 1)
    m = empirical([[0.0], [2.0]])
    assert energy_sq_ustat(m, m, g) <= 0.0
    assert energy_sq_ustat(m, empirical([[1.0], [1.0]]), g) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        energy_sq_ustat(m, empirical([[1.0]]), g)
    with pytest.raises(ValueError):
        energy_sq_ustat(empirical([[0.0], [1.0]], [0.3, 0.7]), m, g)


def test_ustat_unbiased_against_population_oracle():
    # population value from a 1e5-point V-statistic (exact 1-D merge route)
    g = GammaOrder(1.0, 1)
    rng = np.random.default_rng(11)
    oracle_reps = np.array(
        [
            energy_sq_1d_exact(
                project_pair(
                    empirical(rng.normal(size=(100_000, 1))),
                    empirical(rng.normal(loc=0.6, size=(100_000, 1))),
                    [1.0],
                ),
                g,
            )
            for _ in range(8)
        ]
    )
    population = oracle_reps.mean()
    oracle_se = oracle_reps.std(ddof=1) / math.sqrt(len(oracle_reps))

    trials, n = 10_000, 50
    X = rng.normal(size=(trials, n))
    Y = rng.normal(loc=0.6, size=(trials, n))
    cross = np.abs(X[:, :, None] - Y[:, None, :]).sum(axis=(1, 2))
    sxx = np.abs(X[:, :, None] - X[:, None, :]).sum(axis=(1, 2))
    syy = np.abs(Y[:, :, None] - Y[:, None, :]).sum(axis=(1, 2))
    vals = 2 * cross / (n * n) - sxx / (n * (n - 1)) - syy / (n * (n - 1))
    # spot-check the vectorized U-statistic against the library implementation
    lib = energy_sq_ustat(empirical(X[0][:, None]), empirical(Y[0][:, None]), g)
    assert vals[0] == pytest.approx(lib, rel=1e-12)
    se = math.hypot(vals.std(ddof=1) / math.sqrt(trials), oracle_se)
    assert abs(vals.mean() - population) <= 3 * se


def test_vstat_symmetry_is_exact():
    rng = np.random.default_rng(3)
    for d in (1, 3):
        g = GammaOrder(0.7, d)
        a = rand_measure(rng, 23, d, weighted=True)
        b = rand_measure(rng, 17, d)
        assert energy_sq_vstat(a, b, g) == energy_sq_vstat(b, a, g)


def test_triangle_inequality():
    rng = np.random.default_rng(5)
    for gamma in (0.5, 1.0, 1.5):
        for _ in range(333):
            d = int(rng.integers(1, 4))
            g = GammaOrder(gamma, d)
            a, b, c = (rand_measure(rng, 20, d) for _ in range(3))
            eab = math.sqrt(energy_sq_vstat(a, b, g))
            ebc = math.sqrt(energy_sq_vstat(b, c, g))
            eac = math.sqrt(energy_sq_vstat(a, c, g))
            assert eac <= eab + ebc + 1e-10


def test_mmd_identity():
    rng = np.random.default_rng(9)
    for gamma in (0.5, 1.0, 1.5):
        for d in (1, 2, 3):
            g = GammaOrder(gamma, d)
            a = rand_measure(rng, 60, d, weighted=True)
            b = rand_measure(rng, 45, d, weighted=True)
            assert energy_sq_mmd(a, b, g) == pytest.approx(energy_sq_vstat(a, b, g), abs=1e-10)


@pytest.mark.slow
def test_mmd_identity_large_n():
    rng = np.random.default_rng(10)
    g = GammaOrder(1.0, 2)
    a = empirical(rng.normal(size=(10_000, 2)))
    b = empirical(rng.normal(size=(10_000, 2)) + 0.1)
    assert energy_sq_mmd(a, b, g) == pytest.approx(energy_sq_vstat(a, b, g), abs=1e-10)


def test_scaling_covariance():
    rng = np.random.default_rng(13)
    for gamma in (0.5, 1.0, 1.5):
        g = GammaOrder(gamma, 2)
        a = rand_measure(rng, 30, 2, weighted=True)
        b = rand_measure(rng, 25, 2)
        base = energy_sq_vstat(a, b, g)
        for c in (0.25, 3.0):
            scaled = energy_sq_vstat(a.scaled(c), b.scaled(c), g)
            assert scaled == pytest.approx(c**gamma * base, rel=1e-12)


def test_energy_bounded_by_tv_on_shared_support():
    # ratio E_gamma / TV over discrete pairs on shared unit-ball supports:
    # finite, and its maximum is stable across reseeding
    maxima = []
    for seed in (0, 1):
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(500):
            d = int(rng.integers(1, 4))
            k = int(rng.integers(2, 12))
            g = GammaOrder(float(rng.choice([0.5, 1.0, 1.5])), d)
            support = rng.normal(size=(k, d))
            support /= np.maximum(np.linalg.norm(support, axis=1, keepdims=True), 1.0)
            w = rng.dirichlet(np.ones(k))
            u = rng.dirichlet(np.ones(k))
            tv = 0.5 * np.abs(w - u).sum()
            if tv < 1e-6:
                continue
            e = math.sqrt(energy_sq_vstat(empirical(support, w), empirical(support, u), g))
            worst = max(worst, e / tv)
        assert math.isfinite(worst)
        maxima.append(worst)
    assert max(maxima) <= 10 * min(maxima)


def test_grad_matches_finite_differences():
    rng = np.random.default_rng(17)
    for gamma in (0.6, 1.0, 1.5):
        g = GammaOrder(gamma, 2)
        Y = rng.normal(size=(6, 2))
        nu = rand_measure(rng, 9, 2, weighted=True)
        grad = grad_energy_sq(Y, nu, g)
        h = 1e-5
        for j in (0, 3, 5):
            for axis in (0, 1):
                up = Y.copy()
                up[j, axis] += h
                dn = Y.copy()
                dn[j, axis] -= h
                fd = (
                    energy_sq_vstat(empirical(up), nu, g) - energy_sq_vstat(empirical(dn), nu, g)
                ) / (2 * h)
                assert grad[j, axis] == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_grad_single_pair_example():
    g = GammaOrder(1.0, 1)
    grad = grad_energy_sq(np.array([[2.0]]), empirical([[0.0]]), g)
    assert grad[0, 0] == pytest.approx(2.0, rel=1e-14)


def test_grad_coincident_pair_convention():
    g = GammaOrder(1.0, 1)
    grad = grad_energy_sq(np.array([[0.5]]), empirical([[0.5]]), g)
    assert grad[0, 0] == 0.0
    # gamma < 1: pair factors are capped, never infinite
    g2 = GammaOrder(0.5, 1)
    grad2 = grad_energy_sq(np.array([[0.5], [0.5 + 1e-300]]), empirical([[2.0]]), g2)
    assert np.all(np.isfinite(grad2))


def test_concentration_bound_smoke():
    # small pilot of the uniform-ball concentration check (full run in acceptance)
    from edstat.experiments import concentration_experiment

    records, slopes = concentration_experiment([2], [50, 200], [1.0], trials=60, seed=5)
    for rec in records:
        assert rec.mean <= rec.bound
    assert slopes[(2, 1.0)].slope == pytest.approx(-1.0, abs=0.2)
