import math

import numpy as np
import pytest

from edstat.energy import GammaOrder, energy_sq_vstat
from edstat.measures import empirical
from edstat.sliced import (
    energy_sq_1d_exact,
    project,
    project_pair,
    psi_feature_gap,
    slice_constant,
    sliced_energy_sq_mc,
    sphere_area,
)


def test_project_first_coordinate():
    m = empirical([[1.0, 5.0], [2.0, -1.0], [0.5, 3.0]])
    p = project(m, [1.0, 0.0])
    np.testing.assert_array_equal(p.values, [0.5, 1.0, 2.0])


def test_project_negated_direction_reverses():
    rng = np.random.default_rng(0)
    m = empirical(rng.normal(size=(10, 3)), rng.dirichlet(np.ones(10)))
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    a = project(m, v)
    b = project(m, -v)
    np.testing.assert_allclose(b.values, -a.values[::-1], atol=1e-15)
    np.testing.assert_allclose(b.weights, a.weights[::-1], atol=1e-15)


def test_project_recovers_line_parameters():
    t = np.array([-2.0, 0.3, 1.7])
    u = np.array([3.0, 4.0]) / 5.0
    m = empirical(t[:, None] * u)
    p = project(m, u)
    np.testing.assert_allclose(p.values, np.sort(t), atol=1e-15)


def test_project_direction_normalization():
    m = empirical([[1.0, 0.0]])
    with pytest.warns(UserWarning):
        project(m, [1.0 + 1e-7, 0.0])
    with pytest.raises(ValueError):
        project(m, [2.0, 0.0])


def test_energy_1d_exact_examples():
    g = GammaOrder(1.0, 1)
    p = project_pair(empirical([[0.0], [2.0]]), empirical([[1.0]]), [1.0])
    assert energy_sq_1d_exact(p, g) == pytest.approx(1.0, rel=1e-14)
    same = project_pair(empirical([[0.3], [0.9]]), empirical([[0.3], [0.9]]), [1.0])
    assert energy_sq_1d_exact(same, g) == pytest.approx(0.0, abs=1e-15)


def test_energy_1d_exact_agrees_with_pairwise():
    rng = np.random.default_rng(1)
    g = GammaOrder(1.0, 1)
    for _ in range(1000):
        n, m = int(rng.integers(2, 25)), int(rng.integers(2, 25))
        a = empirical(rng.normal(size=(n, 1)), rng.dirichlet(np.ones(n)))
        b = empirical(rng.normal(size=(m, 1)), rng.dirichlet(np.ones(m)))
        exact = energy_sq_1d_exact(project_pair(a, b, [1.0]), g)
        assert exact == pytest.approx(energy_sq_vstat(a, b, g), abs=1e-10)


def test_psi_feature_gap_examples():
    g = GammaOrder(1.0, 1)
    p = project_pair(empirical([[0.0], [2.0]]), empirical([[1.0]]), [1.0])
    assert psi_feature_gap(p, -10.0, g) == pytest.approx(0.0, abs=1e-15)
    # mass of X at or above 0.5 is 1/2, of Y is 1: signed gap -1/2
    assert psi_feature_gap(p, 0.5, g) == pytest.approx(-0.5, rel=1e-15)
    assert abs(psi_feature_gap(p, 0.5, g)) == pytest.approx(0.5, rel=1e-15)
    g05 = GammaOrder(0.5, 1)
    p2 = project_pair(empirical([[1.0]]), empirical([[0.0]]), [1.0])
    assert psi_feature_gap(p2, 0.0, g05) == pytest.approx(1.0, rel=1e-15)


def test_sliced_dim1_degenerates_to_direct():
    rng = np.random.default_rng(2)
    for gamma in (0.5, 1.0, 1.5):
        g = GammaOrder(gamma, 1)
        a = empirical(rng.normal(size=(20, 1)))
        b = empirical(rng.normal(size=(15, 1)) + 0.4)
        est = sliced_energy_sq_mc(a, b, g, n_dirs=10, seed=0)
        assert est.value == pytest.approx(energy_sq_vstat(a, b, g), abs=1e-12)
        assert est.standard_error == 0.0


def test_sliced_identical_measures_vanish():
    rng = np.random.default_rng(3)
    g = GammaOrder(1.0, 2)
    a = empirical(rng.normal(size=(30, 2)))
    est = sliced_energy_sq_mc(a, a, g, n_dirs=200, seed=1)
    assert est.value <= 1e-12


def test_sliced_gamma1_d2_within_3se():
    rng = np.random.default_rng(4)
    g = GammaOrder(1.0, 2)
    a = empirical(rng.normal(size=(50, 2)))
    b = empirical(rng.normal(size=(50, 2)) * 0.8 + 0.3)
    est = sliced_energy_sq_mc(a, b, g, n_dirs=10_000, seed=2)
    direct = energy_sq_vstat(a, b, g)
    assert abs(est.value - direct) <= 3 * est.standard_error


def test_sliced_direct_consistency_matrix():
    rng = np.random.default_rng(5)
    checked = 0
    for gamma in (0.5, 1.0, 1.5):
        for d in (2, 3):
            for rep in range(4):
                g = GammaOrder(gamma, d)
                a = empirical(rng.normal(size=(25, d)), rng.dirichlet(np.ones(25)))
                b = empirical(rng.normal(size=(20, d)) * 0.7 + 0.2)
                est = sliced_energy_sq_mc(a, b, g, n_dirs=4000, seed=100 + checked)
                direct = energy_sq_vstat(a, b, g)
                assert abs(est.value - direct) <= 3 * est.standard_error
                checked += 1
    assert checked == 24


def test_rotation_invariance():
    rng = np.random.default_rng(6)
    g = GammaOrder(1.0, 2)
    theta = 0.7
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    a = empirical(rng.normal(size=(40, 2)))
    b = empirical(rng.normal(size=(35, 2)) + 0.2)
    ra = empirical(a.points @ R.T)
    rb = empirical(b.points @ R.T)
    assert energy_sq_vstat(ra, rb, g) == pytest.approx(energy_sq_vstat(a, b, g), rel=1e-12)
    e1 = sliced_energy_sq_mc(a, b, g, n_dirs=4000, seed=7)
    e2 = sliced_energy_sq_mc(ra, rb, g, n_dirs=4000, seed=8)
    assert abs(e1.value - e2.value) <= 3 * math.hypot(e1.standard_error, e2.standard_error)


def test_dh_identity_in_dim1():
    # in d=1 the halfspace factor is 1: the CDF-gap integral over both ray
    # orientations equals the squared energy distance exactly
    rng = np.random.default_rng(8)
    g = GammaOrder(1.0, 1)
    a = empirical(rng.normal(size=(30, 1)))
    b = empirical(rng.normal(size=(25, 1)) + 0.5)
    assert g.dH_factor == pytest.approx(1.0, rel=1e-15)
    z = np.concatenate([a.points[:, 0], b.points[:, 0]])
    s = np.concatenate([a.weights, -b.weights])
    order = np.argsort(z)
    cum = np.cumsum(s[order])
    dz = np.diff(z[order])
    both_orientations = 2 * float(np.dot(cum[:-1] ** 2, dz))
    assert both_orientations == pytest.approx(energy_sq_vstat(a, b, g), abs=1e-10)


def test_slice_constant_dim1_is_one():
    for gamma in (0.5, 1.0, 1.5):
        assert slice_constant(GammaOrder(gamma, 1)) == pytest.approx(1.0, rel=1e-12)
    assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-14)
