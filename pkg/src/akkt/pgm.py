"""Projected gradient with Armijo backtracking and Barzilai-Borwein steps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

STEP_MIN = 1e-10
STEP_MAX = 1e10


@dataclass
class PgResult:
    x: np.ndarray
    residual: float
    iterations: int
    converged: bool
    message: str = ""


def projected_gradient(fun: Callable, grad: Callable, project: Callable,
                       stationarity: Callable, x0, tol: float, max_iter: int,
                       weights=None, sigma: float = 1e-4, beta: float = 0.5,
                       step0: float | None = None) -> PgResult:
    """Minimize ``fun`` over a convex set given by its projector.

    ``grad`` must return the Riesz gradient for the inner product with the
    given diagonal ``weights``.  A step alpha is accepted once
    ``fun(x+) <= fun(x) - sigma/alpha * |x+ - x|^2`` (plus a roundoff
    allowance); the trial step is the BB1 quotient of the previous step,
    clipped to [1e-10, 1e10].  Iteration stops when
    ``stationarity(x, grad(x)) <= tol``.
    """
    x = project(np.asarray(x0, dtype=float))
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    fx = fun(x)
    g = grad(x)
    res = stationarity(x, g)
    if res <= tol:
        return PgResult(x, res, 0, True)
    if step0 is None:
        gn = float(np.max(np.abs(g), initial=0.0))
        step0 = 1.0 / gn if gn > 0 else 1.0
    alpha = float(np.clip(step0, STEP_MIN, STEP_MAX))
    eps = np.finfo(float).eps
    for it in range(1, max_iter + 1):
        a = alpha
        while True:
            xn = project(x - a * g)
            d = xn - x
            dd = float(np.dot(w * d, d))
            fn = fun(xn)
            if fn <= fx - sigma / a * dd + 8 * eps * max(1.0, abs(fx)):
                break
            a *= beta
            if a < 1e-30:
                return PgResult(x, res, it, False, "line search failed")
        if dd == 0.0:
            return PgResult(x, res, it, res <= tol, "stalled")
        gn = grad(xn)
        s_y = float(np.dot(w * d, gn - g))
        alpha = STEP_MAX if s_y <= 0 else float(np.clip(dd / s_y, STEP_MIN, STEP_MAX))
        x, fx, g = xn, fn, gn
        res = stationarity(x, g)
        if res <= tol:
            return PgResult(x, res, it, True)
    return PgResult(x, res, max_iter, False, "max_iter reached")
