"""Signal-propagation diagnostics for sparse multilayer perceptrons.

Networks are ``x^l = act(W^l x^{l-1} + b^l)`` with masked weights.  The
input-output Jacobian is accumulated layer by layer and its singular values
are computed with a one-sided (Hestenes) Jacobi sweep, i.e. cyclic Jacobi
on the Gram matrix applied implicitly to the columns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .ai import DEFAULT_ITERS, DEFAULT_STEP, ai_optimize
from .allocators import ALLOCATORS, DensityProfile, LayerSpec
from .conv import round_half_away
from .givens import RngLike, make_rng, sample_biases, sample_rectangular

__all__ = [
    "ACTIVATIONS",
    "CRITICAL_CONSTANTS",
    "MLPSpec",
    "SparseMLP",
    "Spectrum",
    "build_sparse_mlp",
    "critical_constants",
    "haar_orthogonal",
    "jacobi_singular_values",
    "jacobian",
    "random_mask",
    "singular_values",
    "spectrum_sweep",
    "SPECTRUM_COLUMNS",
]

SPECTRUM_COLUMNS = ("scheme", "allocator", "activation", "sparsity", "seed", "mean_sv", "max_sv")
SCHEMES = ("base", "eoi", "ai")

CRITICAL_CONSTANTS = {
    "default": (1.0, 0.0),
    "deep_tanh": (1.0247, 0.00448),
}


def critical_constants(name: str = "default") -> tuple[float, float]:
    """``(sigma_w, sigma_b)`` presets: ``default`` and the deep tanh critical point."""
    try:
        return CRITICAL_CONSTANTS[name]
    except KeyError:
        raise ValueError(
            f"unknown constants {name!r}; choose from {sorted(CRITICAL_CONSTANTS)}"
        ) from None


def _hard_tanh(h):
    return np.clip(h, -1.0, 1.0)


def _hard_tanh_prime(h):
    return ((h > -1.0) & (h < 1.0)).astype(float)


def _tanh_prime(h):
    return 1.0 - np.tanh(h) ** 2


ACTIVATIONS = {
    "linear": (lambda h: h, np.ones_like),
    "tanh": (np.tanh, _tanh_prime),
    "hard_tanh": (_hard_tanh, _hard_tanh_prime),
    "relu": (lambda h: np.maximum(h, 0.0), lambda h: (h > 0).astype(float)),
}


@dataclass(frozen=True)
class MLPSpec:
    depth: int
    width: int
    activation: str = "linear"
    sigma_w: float = 1.0
    sigma_b: float = 0.0
    in_dim: Optional[int] = None
    out_dim: Optional[int] = None

    def __post_init__(self):
        if self.depth < 1 or self.width < 1:
            raise ValueError("depth and width must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not self.sigma_w > 0:
            raise ValueError("sigma_w must be positive")

    @property
    def dims(self) -> list[int]:
        n_in = self.width if self.in_dim is None else self.in_dim
        n_out = self.width if self.out_dim is None else self.out_dim
        return [n_in] + [self.width] * (self.depth - 1) + [n_out]

    def layer_specs(self) -> list[LayerSpec]:
        dims = self.dims
        return [LayerSpec.fc(a, b) for a, b in zip(dims[:-1], dims[1:])]


@dataclass
class SparseMLP:
    weights: list[np.ndarray]  # (out, in), already masked
    masks: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str
    scheme: str = ""

    def __post_init__(self):
        for w, m in zip(self.weights, self.masks):
            if w.shape != m.shape or np.any(w[~m] != 0.0):
                raise ValueError("weights must vanish outside their masks")
        for w0, w1 in zip(self.weights[:-1], self.weights[1:]):
            if w0.shape[0] != w1.shape[1]:
                raise ValueError("layer shapes do not chain")

    @property
    def depth(self) -> int:
        return len(self.weights)

    def forward(self, x: np.ndarray) -> np.ndarray:
        act, _ = ACTIVATIONS[self.activation]
        h = np.asarray(x, dtype=float)
        for w, m, b in zip(self.weights, self.masks, self.biases):
            h = act((w * m) @ h + b)
        return h


def haar_orthogonal(rows: int, cols: int, rng: RngLike = None) -> np.ndarray:
    """Haar-distributed matrix with orthonormal rows or columns (QR with sign fix)."""
    rng = make_rng(rng)
    big, small = max(rows, cols), min(rows, cols)
    z = rng.standard_normal((big, small))
    q, r = np.linalg.qr(z)
    q *= np.where(np.diag(r) < 0, -1.0, 1.0)
    return q if rows >= cols else q.T


def random_mask(shape: tuple[int, int], d: float, rng: RngLike = None) -> np.ndarray:
    """Boolean mask with exactly ``round(d * size)`` ones at uniform positions."""
    rng = make_rng(rng)
    size = shape[0] * shape[1]
    count = min(size, max(0, round_half_away(d * size)))
    mask = np.zeros(size, dtype=bool)
    if count == size:
        mask[:] = True
    else:
        mask[rng.choice(size, size=count, replace=False)] = True
    return mask.reshape(shape)


def _densities(profile: Union[DensityProfile, Sequence[float]]) -> list[float]:
    return list(profile.densities) if isinstance(profile, DensityProfile) else list(profile)


def build_sparse_mlp(
    spec: MLPSpec,
    profile: Union[DensityProfile, Sequence[float]],
    scheme: str,
    rng: RngLike = None,
    ai_iters: int = DEFAULT_ITERS,
    ai_step: float = DEFAULT_STEP,
) -> SparseMLP:
    """Initialize a sparse MLP under the ``base``, ``eoi`` or ``ai`` scheme.

    ``base`` masks a dense Haar-orthogonal matrix with a uniform random mask,
    ``ai`` then runs the orthogonality optimization on that masked start,
    and ``eoi`` samples an exactly orthogonal matrix with Givens rotations.
    Weights are scaled by ``spec.sigma_w`` and biases drawn with
    ``spec.sigma_b`` for every scheme.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    densities = _densities(profile)
    if len(densities) != spec.depth:
        raise ValueError(f"profile has {len(densities)} layers, network has {spec.depth}")
    rng = make_rng(rng)
    dims = spec.dims
    weights, masks, biases = [], [], []
    for n_in, n_out, d in zip(dims[:-1], dims[1:], densities):
        if scheme == "eoi":
            sample = sample_rectangular(n_out, n_in, d, rng=rng)
            w = np.array(sample.values)
            m = np.array(sample.support)
        else:
            w = haar_orthogonal(n_out, n_in, rng)
            m = random_mask(w.shape, d, rng)
            w = w * m
            if scheme == "ai":
                w = ai_optimize(w, m, ai_iters, ai_step).weights
        weights.append(w * spec.sigma_w)
        masks.append(m)
        biases.append(sample_biases(n_out, spec.sigma_b, rng))
    return SparseMLP(weights, masks, biases, spec.activation, scheme)


def jacobian(net: SparseMLP, x: np.ndarray) -> np.ndarray:
    """Input-output Jacobian ``D^L W^L ... D^1 W^1`` at ``x``."""
    act, prime = ACTIVATIONS[net.activation]
    h = np.asarray(x, dtype=float)
    jac = np.eye(h.shape[0])
    for w, m, b in zip(net.weights, net.masks, net.biases):
        wm = w * m
        pre = wm @ h + b
        jac = prime(pre)[:, None] * (wm @ jac)
        h = act(pre)
    return jac


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        a = np.array(players[: n // 2])
        b = np.array(players[n - 1 : n // 2 - 1 : -1])
        rounds.append((np.minimum(a, b), np.maximum(a, b)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_singular_values(a: np.ndarray, max_sweeps: int = 60) -> np.ndarray:
    """Singular values (descending) by one-sided Jacobi with round-robin pairing."""
    u = np.array(a, dtype=float)
    if u.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.all(np.isfinite(u)):
        raise ValueError("matrix has non-finite entries")
    if u.shape[0] < u.shape[1]:
        u = u.T.copy()
    k = u.shape[1]
    if k == 0:
        return np.zeros(0)
    if k == 1:
        return np.array([np.linalg.norm(u[:, 0])])
    if k % 2:
        u = np.hstack([u, np.zeros((u.shape[0], 1))])
    tol = np.finfo(float).eps * u.shape[0]
    schedule = _round_robin(u.shape[1])
    for _ in range(max_sweeps):
        rotated = False
        for p, q in schedule:
            ap, aq = u[:, p], u[:, q]
            alpha = np.einsum("ij,ij->j", ap, ap)
            beta = np.einsum("ij,ij->j", aq, aq)
            gamma = np.einsum("ij,ij->j", ap, aq)
            active = np.abs(gamma) > tol * np.sqrt(alpha * beta)
            if not active.any():
                continue
            rotated = True
            g = np.where(active, gamma, 1.0)
            # tiny gamma overflows zeta to inf, giving t = 0: the right limit
            with np.errstate(over="ignore"):
                zeta = (beta - alpha) / (2.0 * g)
                t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = np.where(active, c * t, 0.0)
            c = np.where(active, c, 1.0)
            u[:, p] = c * ap - s * aq
            u[:, q] = s * ap + c * aq
        if not rotated:
            break
    sv = np.sort(np.linalg.norm(u, axis=0))[::-1]
    return sv[:k]


@dataclass
class Spectrum:
    values: np.ndarray
    mean: float = field(init=False)
    max: float = field(init=False)

    def __post_init__(self):
        self.mean = float(np.mean(self.values)) if len(self.values) else 0.0
        self.max = float(np.max(self.values)) if len(self.values) else 0.0


def singular_values(j: np.ndarray, check: bool = True) -> Spectrum:
    """Full singular spectrum of ``j`` with mean and max.

    With ``check`` the squared values are compared against the eigenvalues
    of the Gram matrix and an ``ArithmeticError`` is raised on disagreement
    beyond ``1e-8`` relative to the largest eigenvalue.
    """
    sv = jacobi_singular_values(j)
    if check and len(sv):
        j = np.asarray(j, dtype=float)
        gram = j.T @ j if j.shape[0] >= j.shape[1] else j @ j.T
        eig = np.sort(np.linalg.eigvalsh(gram))[::-1]
        scale = max(float(eig[0]), np.finfo(float).tiny)
        if np.max(np.abs(sv**2 - eig)) > 1e-8 * scale:
            raise ArithmeticError("Jacobi singular values disagree with Gram eigenvalues")
    return Spectrum(sv)


def spectrum_sweep(
    spec: MLPSpec,
    allocators: Sequence[str],
    schemes: Sequence[str],
    sparsities: Sequence[float],
    seeds: Sequence[int],
    inputs_per_seed: int = 8,
    activations: Optional[Sequence[str]] = None,
    ai_iters: int = DEFAULT_ITERS,
) -> list[dict]:
    """Mean and max Jacobian singular values over a configuration grid.

    One row per (activation, allocator, sparsity, seed, scheme).  The
    network stream is seeded from ``(seed, allocator, sparsity)`` so every
    scheme in a cell shares it; ``base`` and ``ai`` therefore start from the
    same masked matrices.  Inputs are ``Normal(0, I)`` draws seeded from
    ``seed`` alone.
    """
    if not (allocators and schemes and sparsities and seeds):
        raise ValueError("all sweep lists must be nonempty")
    activations = [spec.activation] if activations is None else list(activations)
    arch = spec.layer_specs()
    n_in = spec.dims[0]
    rows = []
    for act in activations:
        cell_spec = MLPSpec(
            spec.depth, spec.width, act, spec.sigma_w, spec.sigma_b, spec.in_dim, spec.out_dim
        )
        for a_idx, alloc in enumerate(allocators):
            if alloc not in ALLOCATORS:
                raise ValueError(f"unknown allocator {alloc!r}")
            for s_idx, sparsity in enumerate(sparsities):
                profile = ALLOCATORS[alloc](arch, 1.0 - sparsity)
                for seed in seeds:
                    xs = make_rng(np.random.SeedSequence([seed, 0])).standard_normal(
                        (inputs_per_seed, n_in)
                    )
                    for scheme in schemes:
                        net_rng = make_rng(np.random.SeedSequence([seed, 1, a_idx, s_idx]))
                        net = build_sparse_mlp(cell_spec, profile, scheme, net_rng, ai_iters)
                        spectra = [singular_values(jacobian(net, x)) for x in xs]
                        rows.append(
                            {
                                "scheme": scheme,
                                "allocator": alloc,
                                "activation": act,
                                "sparsity": float(sparsity),
                                "seed": int(seed),
                                "mean_sv": float(np.mean([s.mean for s in spectra])),
                                "max_sv": float(np.mean([s.max for s in spectra])),
                            }
                        )
    return rows
