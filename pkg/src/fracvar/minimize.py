"""Dense BFGS minimizer with an Armijo backtracking line search.

Small and deterministic; both trajectory solvers drive it with analytic
gradients. The inverse-Hessian approximation is rescaled after the first
update (Nocedal-Wright style) and updates with non-positive curvature are
skipped rather than forced.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, LineSearchError

_ARMIJO = 1e-4
_MAX_HALVINGS = 60


@dataclass
class MinimizeResult:
    x: np.ndarray
    value: float
    gradient_norm: float
    iterations: int


def bfgs_minimize(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 1000,
) -> MinimizeResult:
    """Minimize ``fun`` from ``x0``; converged when max|grad| < tol.

    Raises ``ConvergenceError`` (with the final gradient norm) at the
    iteration cap and ``LineSearchError`` after 60 failed step reductions.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.size == 0:
        return MinimizeResult(x, float(fun(x)), 0.0, 0)
    m = x.size
    hinv = np.eye(m)
    g = np.asarray(grad(x), dtype=float)
    f = float(fun(x))
    if not np.isfinite(f):
        raise LineSearchError("objective is non-finite at the initial point")
    first_update = True
    for iteration in range(max_iter):
        gnorm = float(np.max(np.abs(g)))
        if gnorm < tol:
            return MinimizeResult(x, f, gnorm, iteration)
        p = -hinv @ g
        slope = float(g @ p)
        if slope >= 0.0:  # numerical loss of descent; restart the metric
            hinv = np.eye(m)
            first_update = True
            p = -g
            slope = float(g @ p)
        step = 1.0
        halvings = 0
        g_new = None
        while True:
            f_new = float(fun(x + step * p))
            if np.isfinite(f_new) and f_new <= f + _ARMIJO * step * slope:
                break
            if np.isfinite(f_new) and abs(f_new - f) <= 4e-13 * (1.0 + abs(f)):
                # objective differences are below rounding; certify progress
                # by the curvature condition instead of sufficient decrease
                g_try = np.asarray(grad(x + step * p), dtype=float)
                if float(g_try @ p) >= 0.9 * slope:
                    g_new = g_try
                    break
            if halvings >= _MAX_HALVINGS:
                raise LineSearchError(
                    f"line search failed after {_MAX_HALVINGS} step reductions "
                    f"(gradient max-norm {gnorm:.3e})"
                )
            if np.isfinite(f_new):
                # quadratic interpolation, safeguarded into [0.1, 0.5] * step
                denom = 2.0 * (f_new - f - slope * step)
                trial = -slope * step * step / denom if denom > 0.0 else 0.5 * step
                step = min(max(trial, 0.1 * step), 0.5 * step)
            else:
                step *= 0.5
            halvings += 1
        s = step * p
        x_new = x + s
        if g_new is None:
            g_new = np.asarray(grad(x_new), dtype=float)
        y = g_new - g
        ys = float(y @ s)
        if ys > 1e-12 * float(np.linalg.norm(y)) * float(np.linalg.norm(s)):
            if first_update:
                hinv *= ys / float(y @ y)
                first_update = False
            rho = 1.0 / ys
            hy = hinv @ y
            # BFGS inverse update: (I - rho s y') Hinv (I - rho y s') + rho s s'
            hinv -= rho * (np.outer(s, hy) + np.outer(hy, s))
            hinv += rho * rho * float(y @ hy) * np.outer(s, s) + rho * np.outer(s, s)
        x, g, f = x_new, g_new, f_new
    gnorm = float(np.max(np.abs(g)))
    raise ConvergenceError(
        f"no convergence within {max_iter} iterations; gradient max-norm {gnorm:.6e}",
        gradient_norm=gnorm,
    )
