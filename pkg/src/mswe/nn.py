"""Small dense building blocks: activations, losses, optimizers, gradient checking.

Everything works on float64 numpy arrays. Gradients are written by hand in the
model modules; this file only provides the primitives they share.
"""
from __future__ import annotations

import logging
from collections import Counter
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

DTYPE = np.float64
PROB_FLOOR = 1e-12
ADAGRAD_EPS = 1e-8
FD_STEP = 1e-5

# numerical events (e.g. probability floor hits), inspectable by callers
events: Counter = Counter()


class ShapeError(ValueError):
    """Operand shapes do not agree."""


class NonFiniteError(FloatingPointError):
    """A gradient or loss contained NaN or Inf."""


def make_rng(seed: int) -> np.random.Generator:
    # PCG64 streams are identical across platforms for a given seed
    return np.random.Generator(np.random.PCG64(seed))


def uniform_init(rng: np.random.Generator, shape, scale: float = 0.01) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape).astype(DTYPE)


def linear_forward(W: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    W = np.asarray(W, dtype=DTYPE)
    x = np.asarray(x, dtype=DTYPE)
    b = np.asarray(b, dtype=DTYPE)
    if W.ndim != 2 or W.shape[1] != x.shape[-1] or b.shape != (W.shape[0],):
        raise ShapeError(f"linear: W{W.shape} x{x.shape} b{b.shape}")
    return x @ W.T + b


def htanh(x: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(x, dtype=DTYPE), -1.0, 1.0)


def htanh_grad(x: np.ndarray) -> np.ndarray:
    """Derivative of hard tanh; 0 at the kinks +-1 and outside."""
    x = np.asarray(x, dtype=DTYPE)
    return ((x > -1.0) & (x < 1.0)).astype(DTYPE)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=DTYPE), 0.0)


def relu_grad(x: np.ndarray) -> np.ndarray:
    return (np.asarray(x) > 0.0).astype(DTYPE)


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    x = np.asarray(x, dtype=DTYPE)
    z = np.exp(x - x.max(axis=axis, keepdims=True))
    return z / z.sum(axis=axis, keepdims=True)


def hinge_rank_loss(s_pos, s_neg):
    """max(0, 1 - s_pos + s_neg); works elementwise on arrays."""
    return np.maximum(0.0, 1.0 - np.asarray(s_pos, dtype=DTYPE) + np.asarray(s_neg, dtype=DTYPE))


def hinge_active(s_pos, s_neg):
    """Subgradient indicator of the hinge: 1 where the margin is violated, 0 at the kink."""
    return ((1.0 - np.asarray(s_pos, dtype=DTYPE) + np.asarray(s_neg, dtype=DTYPE)) > 0.0).astype(DTYPE)


def cross_entropy(gold, pred) -> float:
    gold = np.asarray(gold, dtype=DTYPE)
    pred = np.asarray(pred, dtype=DTYPE)
    if gold.shape != pred.shape:
        raise ShapeError(f"cross_entropy: gold{gold.shape} pred{pred.shape}")
    if np.any(pred < PROB_FLOOR):
        events["probability_floor"] += 1
        logger.debug("cross_entropy: probability clamped to %g", PROB_FLOOR)
        pred = np.maximum(pred, PROB_FLOOR)
    return float(-(gold * np.log(pred)).sum())


def _check_finite(grad: np.ndarray, what: str = "gradient"):
    if not np.all(np.isfinite(grad)):
        bad = np.argwhere(~np.isfinite(grad))
        raise NonFiniteError(
            f"non-finite {what}: {len(bad)} entries, first at index {tuple(bad[0])}"
        )


def sgd_step(param: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
    """In-place ``param -= lr * grad``. Returns ``param``."""
    if param.shape != grad.shape:
        raise ShapeError(f"sgd_step: param{param.shape} grad{grad.shape}")
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    _check_finite(grad)
    param -= lr * grad
    return param


class AdaGradState:
    """Per-tensor accumulated squared gradients."""

    def __init__(self, eps: float = ADAGRAD_EPS):
        self.eps = eps
        self.accum: dict[str, np.ndarray] = {}

    def step(self, name: str, param: np.ndarray, grad: np.ndarray, lr: float) -> np.ndarray:
        return adagrad_step(param, grad, self, lr, name)


def adagrad_step(param: np.ndarray, grad: np.ndarray, state: AdaGradState, lr: float,
                 name: str = "param") -> np.ndarray:
    if param.shape != grad.shape:
        raise ShapeError(f"adagrad_step: param{param.shape} grad{grad.shape}")
    _check_finite(grad)
    acc = state.accum.get(name)
    if acc is None:
        acc = state.accum[name] = np.zeros_like(param, dtype=DTYPE)
    acc += grad * grad
    param -= lr * grad / (np.sqrt(acc) + state.eps)
    return param


def relative_error(analytic, numeric) -> np.ndarray:
    a = np.asarray(analytic, dtype=DTYPE)
    n = np.asarray(numeric, dtype=DTYPE)
    return np.abs(a - n) / np.maximum(1e-8, np.abs(a) + np.abs(n))


def numeric_grad(f: Callable[[np.ndarray], float], x: np.ndarray, step: float = FD_STEP,
                 coords=None) -> np.ndarray:
    """Central differences of scalar ``f`` w.r.t. ``x``, perturbing ``x`` in place.

    ``f`` is called with ``x`` itself, so closures over a parameter object that
    owns ``x`` see the perturbation. ``x`` is restored exactly afterwards.
    """
    grad = np.zeros_like(x, dtype=DTYPE)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    idx = range(flat.size) if coords is None else coords
    for i in idx:
        old = flat[i]
        flat[i] = old + step
        fp = f(x)
        flat[i] = old - step
        fm = f(x)
        flat[i] = old
        gflat[i] = (fp - fm) / (2 * step)
    return grad


def grad_check(f: Callable[[np.ndarray], float], x: np.ndarray, analytic: np.ndarray,
               step: float = FD_STEP, coords=None) -> float:
    """Max relative error between ``analytic`` and central differences of ``f`` at ``x``."""
    if analytic.shape != x.shape:
        raise ShapeError(f"grad_check: x{x.shape} analytic{analytic.shape}")
    num = numeric_grad(f, x, step, coords)
    if coords is not None:
        coords = np.asarray(list(coords))
        return float(relative_error(analytic.reshape(-1)[coords], num.reshape(-1)[coords]).max())
    if x.size == 0:
        return 0.0
    return float(relative_error(analytic, num).max())
