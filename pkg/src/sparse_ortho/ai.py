"""Approximated isometry: gradient descent on the masked Gram deviation.

The loss is ``||A^T A - I||_F^2`` with ``A = W * M``.  Only unmasked entries
move.  A step that would raise the loss is halved and retried, so the
recorded trace never increases.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

__all__ = ["AIResult", "ai_loss", "ai_gradient", "ai_optimize", "DEFAULT_ITERS", "DEFAULT_STEP"]

DEFAULT_ITERS = 10_000
DEFAULT_STEP = 0.01
MAX_HALVINGS = 30


def _gram_dev(a: np.ndarray) -> np.ndarray:
    # Gram over the shorter side so the identity target is attainable
    g = a.T @ a if a.shape[0] >= a.shape[1] else a @ a.T
    g[np.diag_indices_from(g)] -= 1.0
    return g


def ai_loss(w: np.ndarray, m: np.ndarray) -> float:
    a = np.asarray(w, dtype=float) * m
    g = _gram_dev(a)
    return float(np.vdot(g, g))


def _grad(a: np.ndarray, g: np.ndarray, m: np.ndarray) -> np.ndarray:
    if a.shape[0] >= a.shape[1]:
        return 4.0 * (a @ g) * m
    return 4.0 * (g @ a) * m


def ai_gradient(w: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Gradient of :func:`ai_loss` with respect to ``w``, zero on masked entries."""
    a = np.asarray(w, dtype=float) * m
    return _grad(a, _gram_dev(a), m)


@dataclass
class AIResult:
    weights: np.ndarray
    trace: np.ndarray
    iterations: int
    wall_time: float
    step: float
    failed: bool = False

    @property
    def initial_loss(self) -> float:
        return float(self.trace[0])

    @property
    def final_loss(self) -> float:
        return float(self.trace[-1])

    def trace_rows(self):
        return [{"iter": i, "loss": float(v)} for i, v in enumerate(self.trace)]


def ai_optimize(
    w: np.ndarray,
    m: np.ndarray,
    iters: int = DEFAULT_ITERS,
    step: float = DEFAULT_STEP,
) -> AIResult:
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if iters < 0:
        raise ValueError(f"iters must be nonnegative, got {iters}")
    m = np.asarray(m, dtype=float)
    a = np.asarray(w, dtype=float) * m
    if a.shape != m.shape:
        raise ValueError(f"weight shape {a.shape} != mask shape {m.shape}")

    start = time.perf_counter()
    g = _gram_dev(a)
    loss = float(np.vdot(g, g))
    trace = [loss]
    failed = not math.isfinite(loss)
    done = 0
    while done < iters and not failed:
        grad = _grad(a, g, m)
        for _ in range(MAX_HALVINGS + 1):
            trial = a - step * grad
            g_trial = _gram_dev(trial)
            loss_trial = float(np.vdot(g_trial, g_trial))
            if loss_trial <= loss:
                break
            step *= 0.5
        else:
            failed = True
            break
        a, g, loss = trial, g_trial, loss_trial
        trace.append(loss)
        done += 1
    elapsed = time.perf_counter() - start
    return AIResult(a, np.array(trace), done, elapsed, step, failed)
