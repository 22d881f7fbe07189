import numpy as np
import pytest

from edstat.measures import (
    EmpiricalMeasure,
    MeasureFormatError,
    discrete,
    empirical,
    gaussian,
    load_csv,
    moment_gamma,
    sample,
    save_csv,
    uniform_ball,
)


def test_load_csv_defaults_to_uniform_weights(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("x0,x1\n0.0,1.0\n2.0,3.0\n4.0,5.0\n")
    m = load_csv(p)
    assert m.n == 3 and m.dim == 2
    np.testing.assert_allclose(m.weights, [1 / 3, 1 / 3, 1 / 3])


def test_load_csv_preserves_weights(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("x0,w\n0.0,0.5\n1.0,0.25\n2.0,0.25\n")
    m = load_csv(p)
    np.testing.assert_array_equal(m.weights, [0.5, 0.25, 0.25])


@pytest.mark.parametrize(
    "content,fragment",
    [
        ("x0,x1\n0.0,NaN\n", "non-finite"),
        ("x0,w\n0.0,-0.5\n1.0,1.5\n", "negative weight"),
        ("x0,x1\n", "empty file"),
        ("", "empty file"),
        ("a,b\n1,2\n", "malformed header"),
        ("x0,x1\n1.0\n", "expected 2 fields"),
    ],
)
def test_load_csv_distinct_diagnostics(tmp_path, content, fragment):
    p = tmp_path / "bad.csv"
    p.write_text(content)
    with pytest.raises(MeasureFormatError, match=fragment):
        load_csv(p)


def test_load_csv_dimension_mismatch(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("x0,x1\n0.0,1.0\n")
    with pytest.raises(MeasureFormatError, match="dimension mismatch"):
        load_csv(p, expected_dim=3)


def test_roundtrip_is_identity(tmp_path):
    rng = np.random.default_rng(0)
    m = empirical(rng.normal(size=(17, 3)), rng.dirichlet(np.ones(17)))
    save_csv(m, tmp_path / "m.csv")
    back = load_csv(tmp_path / "m.csv")
    np.testing.assert_array_equal(back.points, m.points)
    np.testing.assert_array_equal(back.weights, m.weights)


def test_constructor_invariants():
    with pytest.raises(MeasureFormatError):
        empirical(np.zeros((2, 2)), [0.5, 0.6])
    with pytest.raises(MeasureFormatError):
        empirical(np.zeros((0, 2)))
    with pytest.raises(MeasureFormatError):
        EmpiricalMeasure(np.zeros((2, 2)), np.array([0.5, 0.5]), 3)


def test_measure_is_immutable():
    m = empirical([[1.0, 2.0]])
    with pytest.raises(ValueError):
        m.points[0, 0] = 5.0


def test_uniform_ball_support():
    for d in (1, 2, 5, 10):
        m = sample(uniform_ball(d), 10_000, seed=3)
        assert np.linalg.norm(m.points, axis=1).max() <= 1.0 + 1e-12


def test_degenerate_discrete_pmf():
    support = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    m = sample(discrete(support, [1.0, 0.0, 0.0]), 50, seed=1)
    assert np.all(m.points == support[0])


def test_sampling_is_reproducible():
    a = sample(gaussian(3, scale=2.0), 100, seed=42)
    b = sample(gaussian(3, scale=2.0), 100, seed=42)
    np.testing.assert_array_equal(a.points, b.points)
    c = sample(gaussian(3, scale=2.0), 100, seed=43)
    assert not np.array_equal(a.points, c.points)


def test_moment_gamma_examples():
    assert moment_gamma(empirical([[0.0, 0.0]]), 1.0) == 0.0
    assert moment_gamma(empirical([[1.0, 0.0], [0.0, 1.0]]), 1.0) == pytest.approx(1.0, abs=1e-15)
    assert moment_gamma(empirical([[0.0], [2.0]]), 1.0) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        moment_gamma(empirical([[1.0]]), 0.0)


def test_moment_gamma_homogeneity():
    rng = np.random.default_rng(7)
    m = empirical(rng.normal(size=(40, 3)), rng.dirichlet(np.ones(40)))
    for gamma in (0.3, 1.0, 1.7):
        for c in (0.5, 2.0, 13.0):
            lhs = moment_gamma(m.scaled(c), gamma)
            rhs = c**gamma * moment_gamma(m, gamma)
            assert lhs == pytest.approx(rhs, rel=1e-12)
