import numpy as np
import pytest
from scipy import stats as sps

from occlab.stats import chi_square_uniform, pearson, welch_t


def test_welch_degenerate_conventions():
    assert welch_t([5, 5, 5], [5, 5, 5]) == 1.0
    assert welch_t([5, 5, 5], [6, 6, 6]) == 0.0
    with pytest.raises(ValueError):
        welch_t([1], [2, 3])


def test_welch_separated_samples():
    g = np.random.default_rng(0)
    a = g.normal(0, 1, 200)
    b = g.normal(3, 1, 200)
    assert welch_t(a, b) < 1e-10
    assert welch_t(a, a + 0.0) == 1.0  # identical arrays, nonzero variance


def test_welch_null_pvalues_are_uniform():
    # under H0 the p-value must itself be U(0,1); check with a KS test
    g = np.random.default_rng(42)
    ps = [welch_t(g.normal(0, 1, 30), g.normal(0, 1, 30)) for _ in range(1000)]
    assert sps.kstest(ps, "uniform").pvalue > 0.01


def test_pearson_basics():
    x = np.arange(50, dtype=float)
    assert pearson(x, x) == pytest.approx(1.0)
    assert pearson(x, -3 * x + 7) == pytest.approx(-1.0)
    assert pearson(x, np.full(50, 2.0)) == 0.0
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2, 3])


def test_pearson_independent_near_zero():
    g = np.random.default_rng(7)
    r = pearson(g.normal(size=5000), g.normal(size=5000))
    assert abs(r) < 0.05


def test_chi_square_uniform():
    flat = np.full(64, 1000)
    assert chi_square_uniform(flat) == pytest.approx(1.0)
    skewed = np.full(64, 1000)
    skewed[0] = 3000
    assert chi_square_uniform(skewed) < 1e-6
    # sampled uniform counts should usually not be rejected
    g = np.random.default_rng(1)
    counts = np.bincount(g.integers(0, 64, 64000), minlength=64)
    assert chi_square_uniform(counts) > 0.001
    with pytest.raises(ValueError):
        chi_square_uniform([10])
    with pytest.raises(ValueError):
        chi_square_uniform([0, 0, 0])
