"""Sparse delta-orthogonal convolution kernels.

The channel-mixing matrix ``H`` is a sparse orthogonal sample placed at the
spatial center of a ``(2k+1) x (2k+1)`` kernel; every off-center weight is
zero.  The mask starts as the support of ``H`` and is then topped up by
flipping uniformly chosen zero positions until it holds the target count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .givens import RngLike, SparseOrthoMatrix, make_rng, sample_rectangular

__all__ = ["ConvKernel", "resolve_center_density", "sample_conv", "conv_forward_circular"]

CenterMode = Union[str, float]


def round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


@dataclass
class ConvKernel:
    weights: np.ndarray  # (c_out, c_in, 2k+1, 2k+1)
    mask: np.ndarray
    k: int
    center: SparseOrthoMatrix
    target_density: float
    unfrozen: int

    @property
    def c_out(self) -> int:
        return self.weights.shape[0]

    @property
    def c_in(self) -> int:
        return self.weights.shape[1]

    @property
    def center_density(self) -> float:
        return self.center.density

    @property
    def center_support(self) -> np.ndarray:
        return self.center.support

    @property
    def mask_density(self) -> float:
        return np.count_nonzero(self.mask) / self.mask.size

    def masked_weights(self) -> np.ndarray:
        return self.weights * self.mask


def resolve_center_density(d: float, center_mode: CenterMode) -> float:
    if center_mode == "equal":
        return d
    if center_mode == "sqrt":
        return math.sqrt(d)
    if isinstance(center_mode, str):
        raise ValueError(f"unknown center mode {center_mode!r}")
    d_h = float(center_mode)
    if not 0.0 <= d_h <= 1.0:
        raise ValueError(f"center density must lie in [0, 1], got {d_h}")
    return d_h


def sample_conv(
    c_out: int,
    c_in: int,
    k: int,
    d: float,
    center_mode: CenterMode = "equal",
    rng: RngLike = None,
    sigma_w: float = 1.0,
) -> ConvKernel:
    """Sample a sparse delta-orthogonal kernel with mask density ``d``.

    ``center_mode`` is ``"equal"`` (center density ``d``), ``"sqrt"``
    (``sqrt(d)``) or an explicit center density.  Raises ``ValueError`` when
    the center would be denser than the mask budget allows; the message
    names the largest admissible center density.  With ``k == 0`` the
    kernel is exactly an FC sample and the mask is its support.
    """
    if c_out < 1 or c_in < 1:
        raise ValueError("channel counts must be positive")
    if k < 0 or int(k) != k:
        raise ValueError(f"half-width k must be a nonnegative integer, got {k}")
    if not 0.0 < d <= 1.0:
        raise ValueError(f"mask density must lie in (0, 1], got {d}")
    rng = make_rng(rng)
    width = 2 * k + 1
    area = width * width
    d_h = resolve_center_density(d, center_mode)
    max_center = min(1.0, d * area)
    if d_h > max_center:
        raise ValueError(
            f"center density {d_h:g} exceeds the admissible maximum {max_center:g} "
            f"for mask density {d} with a {width}x{width} kernel"
        )

    h = sample_rectangular(c_out, c_in, d_h, rng=rng)
    total = c_out * c_in * area
    # a 1x1 kernel is a plain FC layer: nothing to unfreeze, overshoot kept
    target = h.nnz if k == 0 else round_half_away(d * total)
    if h.nnz > target:
        # realized center overshoots by up to one rotation's worth of entries
        raise ValueError(
            f"sampled center has {h.nnz} nonzeros but the mask budget is {target}; "
            f"lower the center density below {max_center:g} (realized {h.density:g})"
        )

    weights = np.zeros((c_out, c_in, width, width))
    weights[:, :, k, k] = h.values * sigma_w
    mask = np.zeros(weights.shape, dtype=bool)
    mask[:, :, k, k] = h.support

    extra = target - h.nnz
    if extra:
        zeros = np.flatnonzero(~mask.ravel())
        picked = rng.choice(zeros, size=extra, replace=False)
        mask.ravel()[picked] = True
    weights.flags.writeable = False
    mask.flags.writeable = False
    return ConvKernel(weights, mask, k, h, d, extra)


def conv_forward_circular(kernel: Union[ConvKernel, np.ndarray], x: np.ndarray) -> np.ndarray:
    """Stride-1 cross-correlation with wrap-around padding.

    ``x`` has shape ``(c_in, h, w)``.  A :class:`ConvKernel` contributes
    ``mask * weights``; a raw 4-D array is used as given.
    """
    w = kernel.masked_weights() if isinstance(kernel, ConvKernel) else np.asarray(kernel)
    x = np.asarray(x, dtype=float)
    c_out, c_in, kh, kw = w.shape
    if kh != kw or kh % 2 == 0:
        raise ValueError(f"kernel must be square with odd width, got {kh}x{kw}")
    if x.ndim != 3 or x.shape[0] != c_in:
        raise ValueError(f"input shape {x.shape} does not match {c_in} input channels")
    k = kh // 2
    if x.shape[1] < kh or x.shape[2] < kw:
        raise ValueError(f"spatial size {x.shape[1:]} smaller than kernel {kh}x{kw}")
    y = np.zeros((c_out,) + x.shape[1:])
    for p in range(kh):
        for q in range(kw):
            tap = w[:, :, p, q]
            if not tap.any():
                continue
            shifted = np.roll(x, shift=(k - p, k - q), axis=(1, 2))
            y += np.tensordot(tap, shifted, axes=(1, 0))
    return y
