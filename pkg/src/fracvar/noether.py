"""Invariance checks and conserved-quantity evaluation along trajectories.

The central identity is the transfer formula: for smooth f, g and orders
alpha in (0, 1),

    g . D_C^alpha f - f . D_right^alpha g
        = d/dt sum_r [ (-1)^r g^(r) . I_left^(r+1-alpha)(f - f(a))
                       + f^(r) . I_right^(r+1-alpha) g ] ,

valid when both term sequences decay uniformly. Truncating the sum at order
R gives computable conserved-quantity candidates; the last included term is
reported as ``tail_estimate`` so callers can see what the truncation costs.
Higher derivatives are raw iterated central differences - noisy for large R,
which is why truncation orders above 6 are rejected outright.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericsError, ValidationError
from .fracops import caputo_left, rl_derivative_right, rl_integral_left, rl_integral_right
from .grid import GridFunction, central_difference, trapezoid_weights
from .symmetry import SymmetryGroup
from .variational import ExtremalSolution, VariationalProblem, el_residual

_MAX_TRUNCATION = 6
_DEFAULT_EPS = 1e-4

#: nested evaluation panels (start fraction, end fraction) of [a, b]
_PANEL_FRACTIONS = tuple((k / 16.0, 1.0 - k / 16.0) for k in range(8))


@dataclass
class InvariantSeries:
    """Truncated transfer-formula series: one row of node values per order."""

    truncation_order: int
    terms: np.ndarray  # shape (R + 1, n + 1)
    tail_estimate: float

    def total(self) -> np.ndarray:
        return self.terms.sum(axis=0)


def _check_truncation(truncation: int) -> int:
    if int(truncation) != truncation or truncation < 0:
        raise ValidationError(f"truncation order must be a non-negative integer, got {truncation}")
    if truncation > _MAX_TRUNCATION:
        raise ValidationError(
            f"truncation order {truncation} rejected: repeated numerical differentiation "
            f"beyond {_MAX_TRUNCATION} is noise-dominated"
        )
    return int(truncation)


def _fractional_integral(f: GridFunction, order: float, left: bool) -> np.ndarray:
    """Series helper: order-0 integrals act as the identity (alpha = 1 limit)."""
    if order == 0.0:
        return f.values.copy()
    op = rl_integral_left if left else rl_integral_right
    return op(f, order).values


def _iterated_derivatives(values: np.ndarray, h: float, upto: int) -> list:
    out = [values]
    for _ in range(upto):
        out.append(central_difference(out[-1], h))
    return out


def _series_terms(f2: np.ndarray, g: np.ndarray, grid, alpha: float, truncation: int) -> np.ndarray:
    """Node values of each term; f2 plays f and g plays g in the identity."""
    h = grid.h
    f2_shift = GridFunction(grid, f2 - f2[0])
    f2_derivs = _iterated_derivatives(f2, h, truncation)
    g_derivs = _iterated_derivatives(g, h, truncation)
    terms = np.empty((truncation + 1, grid.n + 1))
    for r in range(truncation + 1):
        order = r + 1.0 - alpha
        ileft = _fractional_integral(f2_shift, order, left=True)
        iright = _fractional_integral(GridFunction(grid, g), order, left=False)
        terms[r] = (-1.0) ** r * np.sum(g_derivs[r] * ileft, axis=1)
        terms[r] += np.sum(f2_derivs[r] * iright, axis=1)
    return terms


def transfer_series(f2: GridFunction, g: GridFunction, alpha, truncation: int) -> InvariantSeries:
    """Evaluate the truncated transfer-formula series for the pair (f2, g)."""
    from .grid import order_value, require_finite, require_same_grid

    truncation = _check_truncation(truncation)
    require_same_grid(f2, g)
    if f2.dim != g.dim:
        raise ValidationError(f"dimension mismatch: {f2.dim} vs {g.dim}")
    require_finite(f2)
    require_finite(g)
    a = order_value(alpha)
    if not 0.0 < a <= 1.0:
        raise ValidationError(f"series order must lie in (0, 1], got {a}")
    terms = _series_terms(f2.values, g.values, f2.grid, a, truncation)
    tail = float(np.max(np.abs(terms[-1])))
    return InvariantSeries(truncation_order=truncation, terms=terms, tail_estimate=tail)


# ------------------------------------------------------------- invariance


def _check_extremality(problem, q, el_tol):
    if el_tol is None:
        return
    res = el_residual(problem, q).values
    norm = float(np.max(np.abs(res[1:-1])))
    if norm > el_tol:
        raise ValidationError(
            f"trajectory is not an extremal at tolerance {el_tol:.3g} "
            f"(residual max-norm {norm:.3g}); invariance is defined along extremals"
        )


def _panel_indices(n: int):
    panels = []
    for lo, hi in _PANEL_FRACTIONS:
        i_a = int(round(lo * n))
        i_b = int(round(hi * n))
        if i_b - i_a >= 2:
            panels.append((i_a, i_b))
    return panels


def _segment_integral(values: np.ndarray, h: float, i_a: int, i_b: int) -> float:
    w = trapezoid_weights(i_b - i_a, h)
    return float(np.dot(w, values[i_a : i_b + 1]))


def _action_integrand(problem, grid, q_values) -> np.ndarray:
    t = grid.nodes()
    v = central_difference(q_values, grid.h)
    w = caputo_left(GridFunction(grid, q_values), problem.alpha).values
    lvals = np.asarray(problem.lagrangian.evaluate(t, q_values, v, w), dtype=float)
    if not np.isfinite(lvals).all():
        raise NumericsError("non-finite Lagrangian during invariance evaluation")
    return lvals


def _transformed_integrand(problem, q: GridFunction, s: SymmetryGroup, eps: float) -> tuple:
    """Integrand of the transformed action on the image grid.

    The trajectory is pushed forward through (psi1, psi2): node times become
    psi1(eps, t_i), state values psi2(eps, q_i), and the Caputo anchor moves
    to psi1(eps, a) - this is the change-of-variables form of the invariance
    integral, with the Jacobian absorbed by integrating on the image nodes.
    Only maps whose node image stays uniform are computable on this grid
    type; anything else is rejected.
    """
    from .grid import Grid

    t = q.grid.nodes()
    s_nodes = np.asarray(s.time_map(eps, t), dtype=float)
    diffs = np.diff(s_nodes)
    if np.any(diffs <= 0.0):
        raise ValidationError("transformed time nodes are not increasing; map unsupported")
    h_new = float(diffs.mean())
    if np.max(np.abs(diffs - h_new)) > 1e-9 * (1.0 + abs(h_new)):
        raise ValidationError(
            "time map sends the uniform grid to a nonuniform one; the transformed "
            "Caputo term is not computable on this grid type"
        )
    grid_new = Grid(float(s_nodes[0]), float(s_nodes[-1]), q.grid.n)
    q_new = np.asarray(s.state_map(eps, q.values), dtype=float)
    return grid_new, _action_integrand(problem, grid_new, q_new)


def invariance_defect(
    problem: VariationalProblem,
    q: GridFunction,
    s: SymmetryGroup,
    time_transform: bool = False,
    eps: float = _DEFAULT_EPS,
    el_tol: float | None = None,
) -> float:
    """Max over the panel of |d/d(eps) transformed action| at eps = 0.

    ``time_transform=False`` transforms the state only (the Caputo anchor
    stays at a); ``True`` also reparametrizes time through psi1, integrating
    on the image of each panel. Central eps-difference with the given step.
    """
    problem._check_trajectory(q, boundary=False)
    if s.dim != problem.dim:
        raise ValidationError(f"symmetry dimension {s.dim} != problem dimension {problem.dim}")
    _check_extremality(problem, q, el_tol)
    n = problem.grid.n
    panels = _panel_indices(n)
    defects = []
    if time_transform:
        grid_p, integrand_p = _transformed_integrand(problem, q, s, eps)
        grid_m, integrand_m = _transformed_integrand(problem, q, s, -eps)
        for i_a, i_b in panels:
            plus = _segment_integral(integrand_p, grid_p.h, i_a, i_b)
            minus = _segment_integral(integrand_m, grid_m.h, i_a, i_b)
            defects.append(abs(plus - minus) / (2.0 * eps))
    else:
        grid = problem.grid
        q_p = np.asarray(s.state_map(eps, q.values), dtype=float)
        q_m = np.asarray(s.state_map(-eps, q.values), dtype=float)
        integrand_p = _action_integrand(problem, grid, q_p)
        integrand_m = _action_integrand(problem, grid, q_m)
        for i_a, i_b in panels:
            plus = _segment_integral(integrand_p, grid.h, i_a, i_b)
            minus = _segment_integral(integrand_m, grid.h, i_a, i_b)
            defects.append(abs(plus - minus) / (2.0 * eps))
    return max(defects)


def invariance_necessary_residual(
    problem: VariationalProblem,
    q: GridFunction,
    s: SymmetryGroup,
    el_tol: float | None = None,
) -> GridFunction:
    """Node-wise necessary condition of invariance (state transformations).

    f2 . (d/dt dL/dv) + dL/dv . (d/dt f2) + dL/dw . D_C^alpha f2
       - f2 . D_right^alpha dL/dw ;
    small along extremals of an invariant functional. Endpoint nodes zero.
    """
    problem._check_trajectory(q, boundary=False)
    if s.dim != problem.dim:
        raise ValidationError(f"symmetry dimension {s.dim} != problem dimension {problem.dim}")
    _check_extremality(problem, q, el_tol)
    grid = problem.grid
    t, qv, v, w = problem.fields(q)
    lag = problem.lagrangian
    d3 = np.asarray(lag.dv(t, qv, v, w), dtype=float)
    d4 = np.asarray(lag.dw(t, qv, v, w), dtype=float)
    _, f2 = s.rates_on(t, qv)
    ddt_d3 = central_difference(d3, grid.h)
    ddt_f2 = central_difference(f2, grid.h)
    cap_f2 = caputo_left(GridFunction(grid, f2), problem.alpha).values
    rl_d4 = rl_derivative_right(GridFunction(grid, d4), problem.alpha).values
    residual = (
        np.sum(f2 * ddt_d3, axis=1)
        + np.sum(d3 * ddt_f2, axis=1)
        + np.sum(d4 * cap_f2, axis=1)
        - np.sum(f2 * rl_d4, axis=1)
    )
    residual[0] = 0.0
    residual[-1] = 0.0
    return GridFunction(grid, residual)


# ------------------------------------------------------ conserved quantities


def noether_quantity(
    problem: VariationalProblem,
    sol: ExtremalSolution,
    s: SymmetryGroup,
    truncation: int = 2,
) -> GridFunction:
    """Candidate conserved quantity along an extremal.

    C(t) = f2 . dL/dv
         + sum_{r=0}^{R} [ (-1)^r (dL/dw)^(r) . I_left^(r+1-alpha)(f2 - f2(a))
                           + f2^(r) . I_right^(r+1-alpha)(dL/dw) ]
         + tau (L - qdot . dL/dv - alpha dL/dw . D_C^alpha q)

    With tau = 0 this is the no-time-change form; R is the series truncation.
    """
    truncation = _check_truncation(truncation)
    if s.dim != problem.dim:
        raise ValidationError(f"symmetry dimension {s.dim} != problem dimension {problem.dim}")
    grid = problem.grid
    t = grid.nodes()
    qv = sol.trajectory.values
    v = sol.velocity.values
    w = sol.caputo_velocity.values
    lag = problem.lagrangian
    lvals = np.asarray(lag.evaluate(t, qv, v, w), dtype=float)
    d3 = np.asarray(lag.dv(t, qv, v, w), dtype=float)
    d4 = np.asarray(lag.dw(t, qv, v, w), dtype=float)
    tau, f2 = s.rates_on(t, qv)
    series = _series_terms(f2, d4, grid, problem.alpha, truncation).sum(axis=0)
    energy_like = lvals - np.sum(v * d3, axis=1) - problem.alpha * np.sum(d4 * w, axis=1)
    c = np.sum(f2 * d3, axis=1) + series + tau * energy_like
    return GridFunction(grid, c)


def autonomous_quantity(problem: VariationalProblem, sol: ExtremalSolution) -> GridFunction:
    """L - qdot . dL/dv - alpha dL/dw . D_C^alpha q, for autonomous Lagrangians."""
    if not problem.lagrangian.autonomous:
        raise ValidationError("autonomous_quantity requires an autonomous Lagrangian")
    t = problem.grid.nodes()
    qv = sol.trajectory.values
    v = sol.velocity.values
    w = sol.caputo_velocity.values
    lag = problem.lagrangian
    lvals = np.asarray(lag.evaluate(t, qv, v, w), dtype=float)
    d3 = np.asarray(lag.dv(t, qv, v, w), dtype=float)
    d4 = np.asarray(lag.dw(t, qv, v, w), dtype=float)
    c = lvals - np.sum(v * d3, axis=1) - problem.alpha * np.sum(d4 * w, axis=1)
    return GridFunction(problem.grid, c)


def drift_report(c: GridFunction) -> float:
    """Normalized deviation of a should-be-constant quantity.

    max over interior nodes of |C(t) - C(t0)| / (1 + |C(t0)|) with t0 the
    first interior node; both endpoint nodes are excluded (operator accuracy
    degrades there).
    """
    if c.dim != 1:
        raise ValidationError("drift_report expects a scalar quantity")
    interior = c.values[1:-1, 0]
    if not np.isfinite(interior).all():
        raise ValidationError("quantity is not finite on the interior nodes")
    c0 = interior[0]
    return float(np.max(np.abs(interior - c0)) / (1.0 + abs(c0)))
