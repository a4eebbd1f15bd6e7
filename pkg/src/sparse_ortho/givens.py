"""Sparse orthogonal matrices built from random Givens rotations.

A matrix is grown from the identity (or ``[I | 0]`` for wide shapes) by
right-multiplying random plane rotations until its structural density
reaches the requested target.  Sparsity is tracked structurally: after a
rotation on columns ``(i, j)`` a row entry is considered nonzero when either
of the two old entries was.  Numeric magnitudes are never thresholded.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

__all__ = [
    "DensityFloorWarning",
    "GivensRotation",
    "SparseOrthoMatrix",
    "apply_rotation_right",
    "density",
    "make_rng",
    "orthogonality_score",
    "sample_biases",
    "sample_rectangular",
    "sample_square",
    "scale_weights",
]

TWO_PI = 2.0 * math.pi
_DEGENERATE_TOL = 1e-12
_CHUNK = 512

RngLike = Union[None, int, np.random.Generator]


class DensityFloorWarning(UserWarning):
    """Requested density lies below what the sparsest orthogonal matrix has."""


def make_rng(seed: RngLike = None) -> np.random.Generator:
    """Return a PCG64-backed generator (the same bit stream on every platform)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _is_degenerate(phi: float) -> bool:
    r = math.fmod(phi, math.pi / 2)
    if r < 0:
        r += math.pi / 2
    return min(r, math.pi / 2 - r) < _DEGENERATE_TOL


def _check_fixed_angle(phi: float) -> float:
    phi = float(phi)
    if not math.isfinite(phi):
        raise ValueError(f"rotation angle must be finite, got {phi}")
    if _is_degenerate(phi):
        raise ValueError(
            f"fixed rotation angle {phi} is a multiple of pi/2; cos or sin "
            "vanishes and structural tracking would be wrong"
        )
    return phi % TWO_PI


@dataclass(frozen=True)
class GivensRotation:
    """Plane rotation of size ``n`` acting on coordinates ``i < j`` (0-based).

    ``fixed=True`` marks a rotation drawn in fixed-angle mode, where angles
    that make ``cos`` or ``sin`` vanish are rejected.
    """

    n: int
    i: int
    j: int
    phi: float
    fixed: bool = False

    def __post_init__(self):
        if not (0 <= self.i < self.j < self.n):
            raise ValueError(
                f"need 0 <= i < j < n, got i={self.i}, j={self.j}, n={self.n}"
            )
        if not (0.0 <= self.phi < TWO_PI):
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi}")
        if self.fixed and _is_degenerate(self.phi):
            raise ValueError(f"degenerate fixed angle {self.phi}")

    def matrix(self) -> np.ndarray:
        """Dense ``n x n`` form of the rotation."""
        g = np.eye(self.n)
        c, s = math.cos(self.phi), math.sin(self.phi)
        g[self.i, self.i] = c
        g[self.j, self.j] = c
        g[self.i, self.j] = -s
        g[self.j, self.i] = s
        return g


@dataclass
class SparseOrthoMatrix:
    """Row-orthogonal matrix values together with their structural support.

    ``values`` and ``support`` are stored column-major since rotations act on
    whole columns.  ``nnz`` is kept in sync incrementally by the sampler.
    Tall matrices are produced as transposes of wide samples and are
    column-orthogonal instead.
    """

    values: np.ndarray
    support: np.ndarray
    nnz: int
    sigma_w: float = 1.0
    rotations: int = 0
    floored: bool = False
    target: Optional[float] = field(default=None, compare=False)

    @classmethod
    def eye(cls, rows: int, cols: Optional[int] = None) -> "SparseOrthoMatrix":
        """``[I_rows | 0]``, the starting point of the sampler."""
        cols = rows if cols is None else cols
        if rows > cols:
            raise ValueError("eye() builds the wide canonical form, need rows <= cols")
        values = np.zeros((rows, cols), order="F")
        support = np.zeros((rows, cols), dtype=bool, order="F")
        idx = np.arange(rows)
        values[idx, idx] = 1.0
        support[idx, idx] = True
        return cls(values, support, rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def density(self) -> float:
        return self.nnz / (self.rows * self.cols)

    @property
    def T(self) -> "SparseOrthoMatrix":
        return SparseOrthoMatrix(
            np.asfortranarray(self.values.T),
            np.asfortranarray(self.support.T),
            self.nnz,
            self.sigma_w,
            self.rotations,
            self.floored,
            self.target,
        )

    def toarray(self) -> np.ndarray:
        return np.array(self.values)

    def freeze(self) -> "SparseOrthoMatrix":
        self.values.flags.writeable = False
        self.support.flags.writeable = False
        return self


def _rotate(a: SparseOrthoMatrix, i: int, j: int, c: float, s: float) -> None:
    v, sup = a.values, a.support
    ci = v[:, i].copy()
    cj = v[:, j]
    # "+ 0.0" turns -0.0 into 0.0 so off-support entries are exactly +0.0
    v[:, i] = ci * c + cj * s + 0.0
    v[:, j] = cj * c - ci * s + 0.0

    si, sj = sup[:, i], sup[:, j]
    before = int(np.count_nonzero(si)) + int(np.count_nonzero(sj))
    union = si | sj
    sup[:, i] = union
    sup[:, j] = union
    a.nnz += 2 * int(np.count_nonzero(union)) - before
    a.rotations += 1


def apply_rotation_right(a: SparseOrthoMatrix, g: GivensRotation) -> SparseOrthoMatrix:
    """In-place ``A <- A @ G``; only columns ``g.i`` and ``g.j`` change."""
    if g.n != a.cols:
        raise ValueError(f"rotation of size {g.n} does not match {a.cols} columns")
    _rotate(a, g.i, g.j, math.cos(g.phi), math.sin(g.phi))
    return a


def _rotation_stream(
    n: int, rng: np.random.Generator, angle: Optional[float]
) -> Iterator[tuple[int, int, float, float]]:
    # uniform over the C(n, 2) unordered pairs
    while True:
        a = rng.integers(0, n, size=_CHUNK)
        b = rng.integers(0, n - 1, size=_CHUNK)
        b = b + (b >= a)
        lo = np.minimum(a, b).tolist()
        hi = np.maximum(a, b).tolist()
        if angle is None:
            phi = rng.uniform(0.0, TWO_PI, size=_CHUNK)
        else:
            phi = np.full(_CHUNK, angle)
        cos = np.cos(phi).tolist()
        sin = np.sin(phi).tolist()
        yield from zip(lo, hi, cos, sin)


def _check_density(d: float) -> float:
    d = float(d)
    if not (0.0 <= d <= 1.0) or math.isnan(d):
        raise ValueError(f"target density must lie in [0, 1], got {d}")
    return d


def sample_rectangular(
    rows: int,
    cols: int,
    d: float,
    angle: Optional[float] = None,
    rng: RngLike = None,
) -> SparseOrthoMatrix:
    """Sample a ``rows x cols`` sparse orthogonal matrix of density at least ``d``.

    Parameters
    ----------
    rows, cols : int
        Shape of the result.  For ``rows <= cols`` the rows are orthonormal;
        taller shapes are sampled as ``cols x rows`` and transposed, so the
        columns are orthonormal.
    d : float
        Target density in ``[0, 1]``.  The result overshoots by at most
        ``1 / max(rows, cols)``.  Targets below the identity floor return
        ``[I | 0]`` with ``floored=True`` and a :class:`DensityFloorWarning`.
    angle : float, optional
        Fixed rotation angle.  ``None`` draws angles uniformly on ``[0, 2*pi)``.
    rng : Generator or int, optional
        Random source, see :func:`make_rng`.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix dimensions must be positive, got {rows}x{cols}")
    d = _check_density(d)
    if angle is not None:
        angle = _check_fixed_angle(angle)
    rng = make_rng(rng)
    if rows > cols:
        return sample_rectangular(cols, rows, d, angle, rng).T

    a = SparseOrthoMatrix.eye(rows, cols)
    a.target = d
    floor = 1.0 / cols
    if d < floor:
        a.floored = True
        warnings.warn(
            f"density {d} is below the floor 1/{cols}; returning the identity",
            DensityFloorWarning,
            stacklevel=2,
        )
        return a.freeze()
    if cols == 1:
        return a.freeze()

    need = d * rows * cols
    stream = _rotation_stream(cols, rng, angle)
    while a.nnz < need:
        i, j, c, s = next(stream)
        _rotate(a, i, j, c, s)
    return a.freeze()


def sample_square(
    n: int, d: float, angle: Optional[float] = None, rng: RngLike = None
) -> SparseOrthoMatrix:
    """Sample an ``n x n`` orthogonal matrix of density at least ``d``."""
    return sample_rectangular(n, n, d, angle, rng)


def density(a: Union[SparseOrthoMatrix, np.ndarray]) -> float:
    if isinstance(a, SparseOrthoMatrix):
        return a.density
    a = np.asarray(a)
    return np.count_nonzero(a) / a.size


def orthogonality_score(
    a: Union[SparseOrthoMatrix, np.ndarray], scale: Optional[float] = None
) -> float:
    """Frobenius norm of ``Gram - scale**2 * I``.

    The Gram matrix is taken over the shorter dimension (rows of a wide
    matrix, columns of a tall one).  For a :class:`SparseOrthoMatrix` the
    scale defaults to its ``sigma_w``; for plain arrays to 1.
    """
    if isinstance(a, SparseOrthoMatrix):
        scale = a.sigma_w if scale is None else scale
        a = a.values
    scale = 1.0 if scale is None else scale
    a = np.asarray(a, dtype=float)
    gram = a @ a.T if a.shape[0] <= a.shape[1] else a.T @ a
    gram[np.diag_indices_from(gram)] -= scale * scale
    return float(np.linalg.norm(gram))


def scale_weights(a: SparseOrthoMatrix, sigma_w: float) -> SparseOrthoMatrix:
    if not sigma_w > 0:
        raise ValueError(f"sigma_w must be positive, got {sigma_w}")
    values = np.asfortranarray(a.values * sigma_w)
    out = SparseOrthoMatrix(
        values,
        a.support.copy(order="F"),
        a.nnz,
        a.sigma_w * sigma_w,
        a.rotations,
        a.floored,
        a.target,
    )
    return out.freeze()


def sample_biases(length: int, sigma_b: float, rng: RngLike = None) -> np.ndarray:
    """I.i.d. ``Normal(0, sigma_b**2)`` biases; exact zeros when ``sigma_b == 0``."""
    if sigma_b < 0:
        raise ValueError(f"sigma_b must be nonnegative, got {sigma_b}")
    if sigma_b == 0:
        return np.zeros(length)
    return make_rng(rng).normal(0.0, sigma_b, size=length)
