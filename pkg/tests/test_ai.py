import math

import numpy as np
import pytest

from sparse_ortho.ai import ai_gradient, ai_loss, ai_optimize
from sparse_ortho.isometry import haar_orthogonal, random_mask


def fd_gradient(w, m, h=1e-6):
    g = np.zeros_like(w)
    for idx in np.ndindex(w.shape):
        e = np.zeros_like(w)
        e[idx] = h
        g[idx] = (ai_loss(w + e, m) - ai_loss(w - e, m)) / (2 * h)
    return g * m


def test_loss_examples():
    q = haar_orthogonal(6, 6, rng=0)
    assert ai_loss(q, np.ones((6, 6))) < 1e-28
    assert ai_loss(np.zeros((5, 5)), np.ones((5, 5))) == 5.0
    r = math.sqrt(2) / 2
    w = np.array([[r, -r], [r, 1.0]])
    m = np.array([[1.0, 1.0], [1.0, 0.0]])
    assert ai_loss(w, m) == pytest.approx(0.75, rel=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((8, 8)) * 0.5
    m = (rng.random((8, 8)) < 0.5).astype(float)
    analytic = ai_gradient(w, m)
    numeric = fd_gradient(w, m)
    scale = np.max(np.abs(numeric))
    assert np.max(np.abs(analytic - numeric)) <= 1e-5 * scale


def test_gradient_rectangular():
    rng = np.random.default_rng(7)
    for shape in [(5, 8), (8, 5)]:
        w = rng.standard_normal(shape) * 0.4
        m = np.ones(shape)
        numeric = fd_gradient(w, m)
        assert np.max(np.abs(ai_gradient(w, m) - numeric)) <= 1e-5 * np.max(np.abs(numeric))


def test_orthogonal_start_zero_iterations():
    q = haar_orthogonal(5, 5, rng=1)
    res = ai_optimize(q, np.ones((5, 5)), iters=0)
    np.testing.assert_array_equal(res.weights, q)
    assert res.iterations == 0 and res.final_loss < 1e-28


def test_diagonal_converges_to_signs():
    w = np.diag([0.5, 2.0])
    res = ai_optimize(w, np.eye(2), iters=2000, step=0.01)
    assert res.final_loss < 1e-12
    np.testing.assert_allclose(np.abs(np.diag(res.weights)), [1.0, 1.0], atol=1e-6)
    assert res.weights[0, 1] == 0.0 and res.weights[1, 0] == 0.0


def test_trace_monotone_and_mask_preserved():
    rng = np.random.default_rng(2)
    m = random_mask((20, 20), 0.2, rng)
    w = haar_orthogonal(20, 20, rng) * m
    res = ai_optimize(w, m, iters=300, step=0.5)  # large step forces backtracking
    assert np.all(np.diff(res.trace) <= 0)
    assert res.step < 0.5
    assert np.all(res.weights[~m] == 0.0)
    assert res.final_loss <= res.initial_loss
    assert len(res.trace) == res.iterations + 1
    assert res.trace_rows()[0] == {"iter": 0, "loss": res.initial_loss}


def test_argument_checks():
    with pytest.raises(ValueError):
        ai_optimize(np.eye(2), np.ones((2, 2)), step=0)
    with pytest.raises(ValueError):
        ai_optimize(np.eye(2), np.ones((2, 2)), iters=-1)
