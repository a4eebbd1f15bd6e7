import itertools
from fractions import Fraction

import numpy as np
import pytest

from sparse_ortho.density_model import (
    SaturationWarning,
    expected_density,
    expected_density_curve,
    inflection_point,
    monte_carlo_density,
    monte_carlo_density_curve,
    rotations_for_density,
    row_nnz_distribution,
)


def enumerate_row_distribution(n, t):
    """Exact p(t, k) for row 0 by walking every sequence of t pairs.

    Structural rule: after rotating (i, j) both entries are nonzero iff
    either was.  Each pair sequence is equally likely.
    """
    pairs = list(itertools.combinations(range(n), 2))
    counts = [Fraction(0)] * n
    weight = Fraction(1, len(pairs) ** t)
    for seq in itertools.product(pairs, repeat=t):
        row = [c == 0 for c in range(n)]
        for i, j in seq:
            on = row[i] or row[j]
            row[i] = row[j] = on
        counts[sum(row) - 1] += weight
    return counts


@pytest.mark.parametrize("n,t", [(3, 1), (3, 2), (4, 2), (4, 3), (5, 3)])
def test_recurrence_matches_enumeration(n, t):
    exact = enumerate_row_distribution(n, t)
    dp = row_nnz_distribution(n, t).probs
    np.testing.assert_allclose(dp, [float(x) for x in exact], rtol=0, atol=1e-15)


def test_base_condition():
    for n in (2, 7, 50):
        p = row_nnz_distribution(n, 0).probs
        assert p[0] == 1.0 and np.all(p[1:] == 0.0)
        assert expected_density(n, 0) == 1 / n


def test_hand_values_n3():
    p = row_nnz_distribution(3, 1).probs
    assert p[0] == 1 / 3 and p[1] == 2 / 3 and p[2] == 0.0
    assert abs(expected_density(3, 1) - 5 / 9) < 1e-15


def test_probability_conservation():
    for t in (0, 1, 10, 50, 500):
        assert abs(row_nnz_distribution(10, t).probs.sum() - 1.0) < 1e-12


def test_curve_monotone_and_consistent():
    curve = expected_density_curve(40, 600)
    assert np.all(np.diff(curve) >= 0)
    for t in (0, 1, 17, 300, 600):
        assert curve[t] == pytest.approx(expected_density(40, t), abs=1e-15)
    assert curve[-1] <= 1.0


def test_n_below_two_rejected():
    with pytest.raises(ValueError):
        row_nnz_distribution(1, 3)


def test_inverse_query_examples():
    assert rotations_for_density(50, 0.02) == 0
    with pytest.warns(SaturationWarning):
        assert rotations_for_density(2, 1.0) == 1


@pytest.mark.parametrize("n,d", [(10, 0.3), (100, 0.5), (64, 0.0625), (30, 0.99)])
def test_inverse_query_minimal(n, d):
    t = rotations_for_density(n, d)
    assert expected_density(n, t) >= d
    assert t == 0 or expected_density(n, t - 1) < d


def test_monte_carlo_small_cases_exact():
    mean, err = monte_carlo_density(2, 1, 5, rng=0)
    assert mean == 1.0 and err == 0.0
    mean, err = monte_carlo_density(3, 1, 7, rng=1)
    assert mean == pytest.approx(5 / 9, abs=1e-15) and err == pytest.approx(0.0, abs=1e-15)


def test_inverse_query_against_monte_carlo():
    t = rotations_for_density(100, 0.5)
    mean, err = monte_carlo_density(100, t, 200, rng=3)
    # the DP value at t is within one rotation's worth of the target
    assert abs(mean - expected_density(100, t)) <= 3 * err + 1e-12
    assert abs(mean - 0.5) <= max(0.01, 3 * err)


def test_monte_carlo_at_270():
    mean, err = monte_carlo_density(100, 270, 200, rng=9)
    assert abs(mean - expected_density(100, 270)) <= 3 * err


def test_mc_curve_shapes():
    mean, err = monte_carlo_density_curve(20, 30, 4, rng=0)
    assert mean.shape == err.shape == (31,)
    assert mean[0] == 1 / 20
    with pytest.raises(ValueError):
        monte_carlo_density_curve(20, 3, 0)


def test_inflection_point_on_logistic():
    t = np.arange(400)
    curve = 1 / (1 + np.exp(-(t - 123.4) / 20))
    assert inflection_point(curve) in (123, 124)
