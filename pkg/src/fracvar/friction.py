"""Linear-friction worked example: quadratic dissipation Lagrangian.

The model couples kinetic and potential energy with a half-order dissipation
term,

    L = m qdot^2 / 2 - U(q) + (gamma / 2) (D_C^(1/2) q)^2 ,

on a window [a, b]. Its stationarity condition is the damped oscillator with
a composed half-derivative force term; in the window-shrink limit (b -> a,
evaluated mid-window) the half-derivative term reduces to linear drag and
the classical damped equation m qdd + gamma qdot = F(q) emerges. This module
provides the Lagrangian, the momentum/Hamiltonian diagnostics, the shrink
study, and a classical integrator for the limiting equation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NumericsError, ValidationError
from .fracops import caputo_left
from .grid import Grid, GridFunction, central_difference
from .lagrangian import LagrangianSpec
from .variational import VariationalProblem

#: dissipation order of the model; the quadratic friction term is built on it
FRICTION_ORDER = 0.5


@dataclass
class FrictionProblem:
    """Particle of mass m with drag coefficient gamma in potential U."""

    mass: float
    gamma: float
    potential: Callable[[np.ndarray], np.ndarray]
    potential_grad: Callable[[np.ndarray], np.ndarray]
    window: Grid

    def __post_init__(self):
        if not (np.isfinite(self.mass) and self.mass > 0.0):
            raise ValidationError(f"mass must be positive, got {self.mass}")
        if not (np.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValidationError(f"friction coefficient must be >= 0, got {self.gamma}")
        probes = np.linspace(-1.0, 1.0, 7)
        if not np.isfinite(np.asarray(self.potential(probes), dtype=float)).all():
            raise ValidationError("potential is not finite on probe points")

    def force(self, q: np.ndarray) -> np.ndarray:
        return -np.asarray(self.potential_grad(q), dtype=float)


def quadratic_potential(stiffness: float = 1.0):
    """Convenience U(q) = k q^2 / 2 with its gradient."""
    return (lambda q: 0.5 * stiffness * q**2, lambda q: stiffness * q)


@dataclass
class FrictionDiagnostics:
    """Momenta, Hamiltonian and the dissipation-corrected energy defect."""

    momentum: GridFunction  # m qdot
    half_momentum: GridFunction  # gamma D_C^(1/2) q
    hamiltonian: GridFunction
    noether_defect: GridFunction  # (gamma/2)(D_C^(1/2) q)^2 - H


def friction_lagrangian(fp: FrictionProblem) -> LagrangianSpec:
    """LagrangianSpec for the model; the dissipation order is 1/2."""

    def evaluate(t, q, v, w):
        u = np.asarray(fp.potential(q[:, 0]), dtype=float)
        return 0.5 * fp.mass * v[:, 0] ** 2 - u + 0.5 * fp.gamma * w[:, 0] ** 2

    return LagrangianSpec(
        dim=1,
        evaluate=evaluate,
        dq=lambda t, q, v, w: -np.asarray(fp.potential_grad(q[:, 0]), dtype=float)[:, None],
        dv=lambda t, q, v, w: fp.mass * v,
        dw=lambda t, q, v, w: fp.gamma * w,
        autonomous=True,
        name="friction",
    )


def friction_variational_problem(fp: FrictionProblem, q_a: float, q_b: float) -> VariationalProblem:
    """The window's variational problem at the model's half order."""
    return VariationalProblem(friction_lagrangian(fp), fp.window, FRICTION_ORDER, ([q_a], [q_b]))


def friction_diagnostics(fp: FrictionProblem, q: GridFunction) -> FrictionDiagnostics:
    """Momenta, Hamiltonian H = m qdot^2/2 + U + (gamma/2) w^2, and defect."""
    if q.grid != fp.window:
        raise ValidationError("trajectory does not live on the problem window")
    if q.dim != 1:
        raise ValidationError("friction diagnostics expect a scalar trajectory")
    v = central_difference(q.values, q.grid.h)[:, 0]
    w = caputo_left(q, FRICTION_ORDER).values[:, 0]
    u = np.asarray(fp.potential(q.values[:, 0]), dtype=float)
    ham = 0.5 * fp.mass * v**2 + u + 0.5 * fp.gamma * w**2
    defect = 0.5 * fp.gamma * w**2 - ham
    if not np.isfinite(ham).all():
        raise NumericsError("non-finite Hamiltonian values along the trajectory")
    return FrictionDiagnostics(
        momentum=GridFunction(q.grid, fp.mass * v),
        half_momentum=GridFunction(q.grid, fp.gamma * w),
        hamiltonian=GridFunction(q.grid, ham),
        noether_defect=GridFunction(q.grid, defect),
    )


def window_shrink_study(
    fp: FrictionProblem, q_global: Callable[[np.ndarray], np.ndarray], windows: Sequence[Grid]
) -> dict:
    """Friction-energy term at the window midpoint versus the first-order law.

    For each window: Delta t, (gamma/2)(D_C^(1/2) q)^2 at the midpoint, the
    first-order approximation (2/pi) gamma qdot^2 Delta t, their ratio, and
    the half-momentum at the midpoint. The ratio column is reported, not
    asserted: evaluating the half-derivative mid-window gives half the
    first-order constant obtained at the window end, so the constant depends
    on the evaluation point. Windows must shrink around a common midpoint.
    """
    if len(windows) < 2:
        raise ValidationError("shrink study needs at least two windows")
    mids = [0.5 * (w.a + w.b) for w in windows]
    spans = [w.b - w.a for w in windows]
    if np.max(np.abs(np.diff(mids))) > 1e-12 * (1.0 + abs(mids[0])):
        raise ValidationError("windows are not nested around a common midpoint")
    if not all(spans[i] > spans[i + 1] for i in range(len(spans) - 1)):
        raise ValidationError("windows must strictly shrink")
    delta_t = np.array(spans)
    energy = np.empty(len(windows))
    first_order = np.empty(len(windows))
    half_momentum = np.empty(len(windows))
    for k, win in enumerate(windows):
        if win.n % 2 != 0:
            raise ValidationError("window grids need an even interval count (midpoint node)")
        q = GridFunction.from_callable(win, q_global)
        mid = win.n // 2
        w_mid = caputo_left(q, FRICTION_ORDER).values[mid, 0]
        v_mid = central_difference(q.values, win.h)[mid, 0]
        energy[k] = 0.5 * fp.gamma * w_mid**2
        first_order[k] = (2.0 / np.pi) * fp.gamma * v_mid**2 * delta_t[k]
        half_momentum[k] = fp.gamma * w_mid
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(first_order != 0.0, energy / first_order, np.nan)
    return {
        "delta_t": delta_t,
        "friction_energy": energy,
        "first_order": first_order,
        "ratio": ratio,
        "half_momentum_mid": half_momentum,
    }


def simulate_damped_eom(
    fp: FrictionProblem, q0: float, v0: float, horizon: float, steps: int
) -> GridFunction:
    """Integrate m qdd + gamma qdot = F(q) with classical RK4.

    This is the window-shrink limit of the stationarity condition, an
    ordinary ODE; the fractional content lives in the window diagnostics.
    Returns columns (q, qdot) on a fresh grid over [0, horizon].
    """
    if steps < 16:
        raise ValidationError(f"steps must be >= 16, got {steps}")
    if not (np.isfinite(horizon) and horizon > 0.0):
        raise ValidationError(f"horizon must be positive, got {horizon}")
    grid = Grid(0.0, float(horizon), int(steps))
    dt = grid.h
    out = np.empty((steps + 1, 2))
    out[0] = (q0, v0)

    def rhs(state):
        q, v = state
        return np.array([v, (float(fp.force(np.asarray(q))) - fp.gamma * v) / fp.mass])

    y = np.array([q0, v0], dtype=float)
    for k in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(y).all() or abs(y[0]) > 1e12:
            raise NumericsError(
                f"integration blew up at step {k + 1} (t = {(k + 1) * dt:.6g}); "
                "reduce the step size"
            )
        out[k + 1] = y
    return GridFunction(grid, out)
