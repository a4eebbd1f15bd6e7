"""Wall-time and orthogonality benchmark for sparse orthogonal generators."""
from __future__ import annotations

import logging
import statistics
import time
import warnings
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .ai import DEFAULT_ITERS, DEFAULT_STEP, ai_optimize
from .givens import make_rng, orthogonality_score, sample_square
from .isometry import haar_orthogonal, random_mask

__all__ = ["BenchRecord", "BENCH_COLUMNS", "SCHEMES", "bench_generation", "generate"]

log = logging.getLogger(__name__)

BENCH_COLUMNS = ("scheme", "n", "density", "wall_time_s", "ortho_score", "seed")
SCHEMES = ("eoi", "ai", "sao")
UNAVAILABLE = {"sao"}


@dataclass
class BenchRecord:
    scheme: str
    n: int
    density: float
    wall_time_s: float
    ortho_score: float
    seed: int

    def as_row(self) -> dict:
        return asdict(self)


def generate(scheme: str, n: int, d: float, rng, ai_iters: int = DEFAULT_ITERS) -> np.ndarray:
    """One ``n x n`` sample of density ``d`` from ``scheme`` as a dense array."""
    rng = make_rng(rng)
    if scheme == "eoi":
        return sample_square(n, d, rng=rng).values
    if scheme == "ai":
        mask = random_mask((n, n), d, rng)
        w = haar_orthogonal(n, n, rng) * mask
        return ai_optimize(w, mask, ai_iters, DEFAULT_STEP).weights
    raise ValueError(f"scheme {scheme!r} is not available")


def bench_generation(
    sizes: Sequence[int],
    densities: Sequence[float],
    schemes: Sequence[str],
    repeats: int = 5,
    seed: int = 0,
    ai_iters: int = DEFAULT_ITERS,
    warmup: bool = True,
) -> list[BenchRecord]:
    """Time ``repeats`` generations per (scheme, n, density) cell.

    Each record carries the median wall time and the mean orthogonality
    score.  BLAS is pinned to one thread while timing; the optional warm-up
    run is discarded.  Unavailable schemes are skipped with a warning.
    """
    if not (sizes and densities and schemes):
        raise ValueError("sizes, densities and schemes must be nonempty")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    records = []
    cell = 0
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        if scheme in UNAVAILABLE:
            msg = f"scheme {scheme!r} is not implemented; its rows are skipped"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            log.warning(msg)
            continue
        for n in sizes:
            for d in densities:
                cell += 1
                times, scores = [], []
                runs = range(-1 if warmup else 0, repeats)
                with threadpool_limits(limits=1):
                    for r in runs:
                        rng = make_rng(np.random.SeedSequence([seed, cell, r + 1]))
                        start = time.perf_counter()
                        a = generate(scheme, n, d, rng, ai_iters)
                        elapsed = time.perf_counter() - start
                        if r >= 0:
                            times.append(elapsed)
                            scores.append(orthogonality_score(a))
                records.append(
                    BenchRecord(
                        scheme, int(n), float(d), statistics.median(times),
                        float(np.mean(scores)), int(seed),
                    )
                )
                log.info("%s n=%d d=%g: %.4gs", scheme, n, d, records[-1].wall_time_s)
    return records
