"""Expected density of products of random Givens rotations.

A fixed row of ``A(t) = G(0) ... G(t-1)`` has ``k`` structural nonzeros with
probability ``p(t, k)``.  A rotation on a uniformly drawn pair keeps the
count when both picked columns are on or both are off the row's support,
and adds one when exactly one of them is.  That gives a two-term recurrence
in ``k`` which is iterated here in ``O(t * n)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .givens import RngLike, SparseOrthoMatrix, _rotate, _rotation_stream, make_rng

__all__ = [
    "RowNnzDistribution",
    "SaturationWarning",
    "row_nnz_distribution",
    "expected_density",
    "expected_density_curve",
    "rotations_for_density",
    "monte_carlo_density",
    "monte_carlo_density_curve",
    "inflection_point",
]

SATURATION_DENSITY = 1.0 - 1e-9


class SaturationWarning(UserWarning):
    """Density 1 is only reached in the limit; a near-1 threshold was used."""


@dataclass(frozen=True)
class RowNnzDistribution:
    """``probs[k - 1]`` is the probability that a row has ``k`` nonzeros."""

    n: int
    t: int
    probs: np.ndarray

    @property
    def expected_nnz(self) -> float:
        return float(np.dot(np.arange(1, self.n + 1), self.probs))

    @property
    def expected_density(self) -> float:
        return self.expected_nnz / self.n


def _transition(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-count probabilities of staying at ``k`` and of growing to ``k + 1``."""
    pairs = math.comb(n, 2)
    k = np.arange(1, n + 1)
    stay = np.array([(math.comb(int(m), 2) + math.comb(n - int(m), 2)) / pairs for m in k])
    grow = np.array([int(m) * (n - int(m)) / pairs for m in k])
    return stay, grow


def _step(p: np.ndarray, stay: np.ndarray, grow: np.ndarray) -> np.ndarray:
    out = p * stay
    out[1:] += p[:-1] * grow[:-1]
    return out


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"density model needs n >= 2, got {n}")


def _initial(n: int) -> np.ndarray:
    p = np.zeros(n)
    p[0] = 1.0
    return p


def row_nnz_distribution(n: int, t: int) -> RowNnzDistribution:
    _check_n(n)
    if t < 0:
        raise ValueError(f"rotation count must be nonnegative, got {t}")
    stay, grow = _transition(n)
    p = _initial(n)
    for _ in range(t):
        p = _step(p, stay, grow)
    return RowNnzDistribution(n, t, p)


def expected_density_curve(n: int, t_max: int) -> np.ndarray:
    """Expected density for every ``t`` in ``0..t_max`` (length ``t_max + 1``)."""
    _check_n(n)
    stay, grow = _transition(n)
    k = np.arange(1, n + 1)
    p = _initial(n)
    out = np.empty(t_max + 1)
    out[0] = 1.0 / n
    for t in range(1, t_max + 1):
        p = _step(p, stay, grow)
        out[t] = np.dot(k, p) / n
    return out


def expected_density(n: int, t: int) -> float:
    return row_nnz_distribution(n, t).expected_density


def rotations_for_density(n: int, d: float, t_limit: int = 10_000_000) -> int:
    """Smallest ``t`` whose expected density reaches ``d``.

    For ``d`` above ``1 - 1e-9`` the search stops at that threshold instead
    and a :class:`SaturationWarning` is issued.
    """
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {d}")
    _check_n(n)
    if d <= 1.0 / n:
        return 0
    if d > SATURATION_DENSITY:
        warnings.warn(
            f"density {d} is reached only asymptotically; using {SATURATION_DENSITY}",
            SaturationWarning,
            stacklevel=2,
        )
        d = SATURATION_DENSITY
    stay, grow = _transition(n)
    k = np.arange(1, n + 1)
    p = _initial(n)
    for t in range(1, t_limit + 1):
        p = _step(p, stay, grow)
        if np.dot(k, p) / n >= d:
            return t
    raise RuntimeError(f"density {d} not reached within {t_limit} rotations")


def monte_carlo_density_curve(
    n: int, t_max: int, trials: int, rng: RngLike = None
) -> tuple[np.ndarray, np.ndarray]:
    """Empirical mean density and its standard error for ``t = 0..t_max``.

    Each trial composes ``t_max`` random rotations onto the identity with the
    sampler's structural bookkeeping and records the density after every
    step.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = make_rng(rng)
    dens = np.empty((trials, t_max + 1))
    size = n * n
    for trial in range(trials):
        a = SparseOrthoMatrix.eye(n)
        stream = _rotation_stream(n, rng, None)
        dens[trial, 0] = a.nnz / size
        for t in range(1, t_max + 1):
            i, j, c, s = next(stream)
            _rotate(a, i, j, c, s)
            dens[trial, t] = a.nnz / size
    mean = dens.mean(axis=0)
    if trials > 1:
        stderr = dens.std(axis=0, ddof=1) / math.sqrt(trials)
    else:
        stderr = np.zeros(t_max + 1)
    return mean, stderr


def monte_carlo_density(
    n: int, t: int, trials: int, rng: RngLike = None
) -> tuple[float, float]:
    """Mean structural density after ``t`` random rotations, with standard error."""
    mean, stderr = monte_carlo_density_curve(n, t, trials, rng)
    return float(mean[-1]), float(stderr[-1])


def inflection_point(curve: np.ndarray) -> int:
    """First ``t`` at which the discrete curvature turns from positive to nonpositive."""
    curv = np.diff(curve, 2)  # curv[t - 1] is the second difference centred at t
    for idx in range(1, len(curv)):
        if curv[idx - 1] > 0 and curv[idx] <= 0:
            return idx + 1
    raise ValueError("curve has no convex-to-concave transition")
