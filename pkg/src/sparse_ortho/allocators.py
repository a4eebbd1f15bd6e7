"""Per-layer density profiles under a global parameter budget."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "LayerSpec",
    "DensityProfile",
    "ProfileDiagnostics",
    "load_arch",
    "uniform_profile",
    "erk_profile",
    "load_profile",
    "save_profile",
    "validate_profile",
    "ALLOCATORS",
]


@dataclass(frozen=True)
class LayerSpec:
    """A fully connected (``in_features -> out_features``) or conv layer.

    Conv layers use ``in_features``/``out_features`` for channel counts and
    ``kernel`` for the spatial ``(w, h)`` size.
    """

    kind: str
    in_features: int
    out_features: int
    kernel: tuple[int, int] = (1, 1)

    def __post_init__(self):
        if self.kind not in ("fc", "conv"):
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if min(self.in_features, self.out_features, *self.kernel) < 1:
            raise ValueError(f"layer dimensions must be positive: {self}")
        if self.kind == "fc" and self.kernel != (1, 1):
            raise ValueError("fully connected layers have no kernel")

    @classmethod
    def fc(cls, n_in: int, n_out: int) -> "LayerSpec":
        return cls("fc", n_in, n_out)

    @classmethod
    def conv(cls, c_in: int, c_out: int, k: int) -> "LayerSpec":
        """Conv layer with a ``(2k+1) x (2k+1)`` kernel."""
        return cls("conv", c_in, c_out, (2 * k + 1, 2 * k + 1))

    @property
    def param_count(self) -> int:
        return self.in_features * self.out_features * self.kernel[0] * self.kernel[1]

    def erk_score(self) -> float:
        n_in, n_out = self.in_features, self.out_features
        if self.kind == "fc":
            return (n_in + n_out) / (n_in * n_out)
        w, h = self.kernel
        return (n_in + n_out + w + h) / (n_in * n_out * w * h)


def _layer_from_dict(obj: dict) -> LayerSpec:
    kind = obj.get("kind")
    if kind == "fc":
        return LayerSpec.fc(int(obj["in"]), int(obj["out"]))
    if kind == "conv":
        if "kernel" in obj:
            w, h = obj["kernel"]
            return LayerSpec("conv", int(obj["c_in"]), int(obj["c_out"]), (int(w), int(h)))
        return LayerSpec.conv(int(obj["c_in"]), int(obj["c_out"]), int(obj["k"]))
    raise ValueError(f"unknown layer kind in {obj!r}")


def load_arch(source: Union[str, Path, dict]) -> list[LayerSpec]:
    """Read ``{"layers": [...]}``; conv ``k`` is the half width of the kernel."""
    if isinstance(source, dict):
        doc = source
    else:
        doc = json.loads(Path(source).read_text())
    try:
        layers = doc["layers"]
    except (KeyError, TypeError) as exc:
        raise ValueError("architecture document needs a 'layers' list") from exc
    if not layers:
        raise ValueError("architecture has no layers")
    return [_layer_from_dict(obj) for obj in layers]


@dataclass
class DensityProfile:
    densities: np.ndarray
    d: float
    param_counts: Optional[np.ndarray] = None
    method: str = "custom"

    def __post_init__(self):
        self.densities = np.asarray(self.densities, dtype=float)
        if self.param_counts is not None:
            self.param_counts = np.asarray(self.param_counts, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.densities)

    def __iter__(self):
        return iter(self.densities.tolist())

    def budget(self) -> float:
        """Realized global density ``sum(d_l * m_l) / sum(m_l)``."""
        m = self.param_counts
        return float(np.dot(self.densities, m) / m.sum())


def _check_budget(d: float) -> None:
    if not 0.0 < d <= 1.0:
        raise ValueError(f"global density must lie in (0, 1], got {d}")


def uniform_profile(arch: Sequence[LayerSpec], d: float) -> DensityProfile:
    _check_budget(d)
    m = np.array([layer.param_count for layer in arch])
    return DensityProfile(np.full(len(arch), float(d)), d, m, "uniform")


def erk_profile(arch: Sequence[LayerSpec], d: float) -> DensityProfile:
    """Erdos-Renyi(-kernel) densities normalized to the budget.

    Layers whose scaled score would exceed 1 are fixed at density 1 and the
    scale is re-solved over the remaining layers.
    """
    _check_budget(d)
    m = np.array([layer.param_count for layer in arch], dtype=float)
    score = np.array([layer.erk_score() for layer in arch])
    dense = np.zeros(len(arch), dtype=bool)
    budget = d * m.sum()
    for _ in range(len(arch) + 1):
        free = ~dense
        remaining = budget - m[dense].sum()
        eps = remaining / np.dot(score[free], m[free])
        over = free & (eps * score > 1.0)
        if not over.any():
            break
        dense |= over
    densities = np.where(dense, 1.0, eps * score)
    return DensityProfile(densities, d, m.astype(np.int64), "erk")


ALLOCATORS = {"uniform": uniform_profile, "erk": erk_profile}


def save_profile(profile: DensityProfile, path: Union[str, Path]) -> None:
    doc = {"d": profile.d, "densities": [float(x) for x in profile.densities]}
    Path(path).write_text(json.dumps(doc) + "\n")


def load_profile(
    path: Union[str, Path], arch: Optional[Sequence[LayerSpec]] = None
) -> DensityProfile:
    """Read ``{"d": ..., "densities": [...]}`` written by an external tool."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
        d = float(doc["d"])
        densities = [float(x) for x in doc["densities"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise ValueError(f"malformed profile file {path}: {exc}") from exc
    if not densities:
        raise ValueError(f"profile file {path} has no densities")
    bad = [x for x in densities if not 0.0 < x <= 1.0 or math.isnan(x)]
    if bad:
        raise ValueError(f"layer densities must lie in (0, 1], got {bad}")
    m = None
    if arch is not None:
        if len(arch) != len(densities):
            raise ValueError(
                f"profile has {len(densities)} layers, architecture has {len(arch)}"
            )
        m = [layer.param_count for layer in arch]
    return DensityProfile(densities, d, m, "file")


@dataclass
class ProfileDiagnostics:
    budget_residual: float  # relative: (realized - d) / d
    out_of_range: list[int] = field(default_factory=list)
    length_mismatch: bool = False

    @property
    def ok(self) -> bool:
        return (
            not self.length_mismatch
            and not self.out_of_range
            and abs(self.budget_residual) <= 1e-9
        )


def validate_profile(
    profile: DensityProfile, arch: Sequence[LayerSpec], d: Optional[float] = None
) -> ProfileDiagnostics:
    d = profile.d if d is None else d
    if len(profile) != len(arch):
        return ProfileDiagnostics(math.nan, [], True)
    dens = profile.densities
    out = [i for i, x in enumerate(dens) if not 0.0 < x <= 1.0]
    m = np.array([layer.param_count for layer in arch], dtype=float)
    realized = float(np.dot(dens, m) / m.sum())
    return ProfileDiagnostics((realized - d) / d, out)
