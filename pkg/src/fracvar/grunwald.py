"""Grunwald-Letnikov backend for the fractional operators.

An independent first-order discretization behind the same signatures as
:mod:`fracvar.fracops`. It shares no kernel-weight code with the primary
schemes, which is the point: the tests cross-check the two discretizations
against each other to catch weight bugs. Not used by the solvers.
"""

from __future__ import annotations

import numpy as np

from .grid import GridFunction, require_finite
from .fracops import _convolve_columns, _derivative_order, _integral_order

__all__ = [
    "gl_rl_derivative_left",
    "gl_rl_derivative_right",
    "gl_caputo_left",
    "gl_caputo_right",
    "gl_rl_integral_left",
    "gl_rl_integral_right",
]


def _binomial_weights(n: int, alpha: float) -> np.ndarray:
    """w_j = (-1)^j C(alpha, j) via the stable recurrence, j = 0..n."""
    w = np.empty(n + 1)
    w[0] = 1.0
    for j in range(1, n + 1):
        w[j] = w[j - 1] * (1.0 - (alpha + 1.0) / j)
    return w


def _integral_weights(n: int, beta: float) -> np.ndarray:
    """v_j = C(beta + j - 1, j), the order -beta Grunwald weights."""
    v = np.empty(n + 1)
    v[0] = 1.0
    for j in range(1, n + 1):
        v[j] = v[j - 1] * (beta + j - 1.0) / j
    return v


def gl_rl_derivative_left(f: GridFunction, order) -> GridFunction:
    alpha = _derivative_order(order)
    require_finite(f)
    n, h = f.grid.n, f.grid.h
    w = _binomial_weights(n, alpha)
    conv = _convolve_columns(w, f.values)
    return f.with_values(conv[: n + 1] * h**-alpha)


def gl_rl_derivative_right(f: GridFunction, order) -> GridFunction:
    reflected = f.with_values(f.values[::-1])
    return f.with_values(gl_rl_derivative_left(reflected, order).values[::-1])


def gl_caputo_left(f: GridFunction, order) -> GridFunction:
    shifted = f.with_values(f.values - f.values[0])
    return gl_rl_derivative_left(shifted, order)


def gl_caputo_right(f: GridFunction, order) -> GridFunction:
    shifted = f.with_values(f.values - f.values[-1])
    return gl_rl_derivative_right(shifted, order)


def gl_rl_integral_left(f: GridFunction, order) -> GridFunction:
    beta = _integral_order(order)
    require_finite(f)
    n, h = f.grid.n, f.grid.h
    v = _integral_weights(n, beta)
    conv = _convolve_columns(v, f.values)
    return f.with_values(conv[: n + 1] * h**beta)


def gl_rl_integral_right(f: GridFunction, order) -> GridFunction:
    reflected = f.with_values(f.values[::-1])
    return f.with_values(gl_rl_integral_left(reflected, order).values[::-1])
