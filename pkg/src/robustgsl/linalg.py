"""Dense/sparse kernels, parameter init, Adam, and finite-difference checking.

Everything here is deterministic: random draws go through an explicit
numpy Generator, and sparse products run single-threaded through scipy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class NumericError(RuntimeError):
    """Raised when a computation produces non-finite values."""


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; identical seed gives identical draws on all platforms."""
    return np.random.default_rng(np.random.PCG64(seed))


def spmm(a: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    """Sparse @ dense product with a shape diagnostic on mismatch."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"spmm shape mismatch: sparse is {a.shape[0]}x{a.shape[1]}, "
            f"dense is {b.shape[0]}x{b.shape[1] if b.ndim > 1 else 1}"
        )
    return np.asarray(a @ b)


def glorot(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform init in +/- sqrt(6 / (rows + cols))."""
    if rows < 1 or cols < 1:
        raise ValueError(f"glorot needs positive dimensions, got {rows}x{cols}")
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign to avoid overflow in exp.
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class AdamState:
    """Adaptive-moment optimizer state for a named set of parameters."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_init(params: dict[str, np.ndarray], lr: float) -> AdamState:
    state = AdamState(lr=lr)
    for name, p in params.items():
        state.m[name] = np.zeros_like(p)
        state.v[name] = np.zeros_like(p)
    return state


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> dict[str, np.ndarray]:
    """One Adam update with bias correction; returns fresh parameter arrays."""
    state.step += 1
    t = state.step
    out = {}
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != param shape {p.shape} for {name!r}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {name!r} at step {t}")
        state.m[name] = state.beta1 * state.m[name] + (1 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1 - state.beta2) * g * g
        mhat = state.m[name] / (1 - state.beta1 ** t)
        vhat = state.v[name] / (1 - state.beta2 ** t)
        out[name] = p - state.lr * mhat / (np.sqrt(vhat) + state.eps)
    return out


def grad_check(loss_and_grad, params: dict[str, np.ndarray], epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_and_grad(params) -> (loss, grads)``; the relative error per entry
    is |analytic - numeric| / max(1, |numeric|).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    loss0, analytic = loss_and_grad(params)
    if not np.isfinite(loss0):
        raise NumericError("loss is not finite at the given parameters")
    worst = 0.0
    for name, p in params.items():
        flat = p.ravel()
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            lp, _ = loss_and_grad(params)
            flat[idx] = orig - epsilon
            lm, _ = loss_and_grad(params)
            flat[idx] = orig
            numeric = (lp - lm) / (2 * epsilon)
            err = abs(analytic[name].ravel()[idx] - numeric) / max(1.0, abs(numeric))
            worst = max(worst, err)
    return worst
