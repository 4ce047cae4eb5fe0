import numpy as np
import pytest

from percmatch.powerlaw import EstimationError, estimate_power_law_exponent, sample_discrete_pareto


def test_identical_degrees_rejected():
    with pytest.raises(EstimationError):
        estimate_power_law_exponent([5] * 100)


def test_too_few_samples():
    with pytest.raises(EstimationError):
        estimate_power_law_exponent([3, 4, 5, 6, 7, 8, 9, 10, 11])


def test_formula_by_hand():
    d = np.array([2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 1, 1])
    tail = d[d >= 2]
    expected = 1 + tail.size / np.log(tail / 1.5).sum()
    assert estimate_power_law_exponent(d, 2) == pytest.approx(expected)
    # default d_min is the smallest positive degree
    full = d[d >= 1]
    assert estimate_power_law_exponent(np.append(d, 0)) == pytest.approx(1 + full.size / np.log(full / 0.5).sum())


@pytest.mark.parametrize("beta", [2.2, 2.5, 2.9])
def test_synthetic_recovery(beta):
    rng = np.random.default_rng(1)
    x = sample_discrete_pareto(100_000, beta, 10, rng)
    d_min = int(np.percentile(x, 1))
    assert abs(estimate_power_law_exponent(x, d_min) - beta) < 0.05
