"""Optimal control with mixed classical and fractional dynamics.

Minimize ``int_a^b L(t, q, u, mu) dt`` subject to

    dq/dt      = phi(t, q, u),
    D_C^alpha q = rho(t, q, mu),      q(a) = q_a ,

with the right endpoint free. The stationarity structure uses the
Hamiltonian H = L + p . phi + p_alpha . rho with co-vector (adjoint)
functions p and p_alpha paired with the two velocity channels.

The solver is a penalty-based direct transcription: all trajectory nodes
except the fixed initial one, plus every control node, are decision
variables; both dynamics channels enter as weighted quadratic penalties with
an increasing weight schedule, and the adjoints are recovered from the
converged penalty multipliers (p = -weight * defect). Adjoint recovery is
first-order in the final weight - tolerances downstream account for that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NumericsError, ValidationError
from .fracops import caputo_left, caputo_left_matrix, rl_derivative_right
from .grid import (
    Grid,
    GridFunction,
    central_difference,
    order_value,
    trapezoid_weights,
)
from .minimize import bfgs_minimize
from .noether import _check_truncation, _series_terms
from .symmetry import SymmetryGroup

_PROBE_SEED = 9319
_VALIDATE_RTOL = 1e-5


def _fd_check(name, analytic, evaluate, args, slot, width):
    """Compare an analytic Jacobian contract against central differences."""
    step = 1e-6
    got = np.asarray(analytic(*args), dtype=float)
    x = args[slot]
    for j in range(width):
        hi = [a.copy() if isinstance(a, np.ndarray) else a for a in args]
        lo = [a.copy() if isinstance(a, np.ndarray) else a for a in args]
        hi[slot][:, j] += step
        lo[slot][:, j] -= step
        fd = (np.asarray(evaluate(*hi), float) - np.asarray(evaluate(*lo), float)) / (2 * step)
        ana = got[..., j] if got.ndim == fd.ndim + 1 else got[:, j]
        tol = _VALIDATE_RTOL * (1.0 + np.maximum(np.abs(ana), np.abs(fd)))
        if not np.all(np.abs(ana - fd) <= tol):
            raise ValidationError(f"control contract {name} disagrees with finite differences")


@dataclass
class ControlProblem:
    """Cost and dynamics contracts, all vectorized over nodes.

    Shapes: ``cost(t,q,u,mu) -> (k,)`` with partials ``(k, n)/(k, m)/(k, d)``;
    ``velocity(t,q,u) -> (k,n)`` with Jacobians ``velocity_dq (k,n,n)`` and
    ``velocity_du (k,n,m)``; likewise for the fractional channel. ``d = 0``
    (no fractional control) is allowed; the fractional constraint then pins
    D_C^alpha q to ``frac_velocity(t, q)`` alone.
    """

    cost: Callable
    cost_dq: Callable
    cost_du: Callable
    cost_dmu: Callable
    velocity: Callable
    velocity_dq: Callable
    velocity_du: Callable
    frac_velocity: Callable
    frac_velocity_dq: Callable
    frac_velocity_dmu: Callable
    alpha: float
    grid: Grid
    q_start: np.ndarray
    state_dim: int
    control_dim: int
    frac_dim: int
    autonomous: bool = False
    name: str = "custom"

    def __post_init__(self):
        self.alpha = order_value(self.alpha)
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError(f"control order must lie in (0, 1], got {self.alpha}")
        self.q_start = np.atleast_1d(np.asarray(self.q_start, dtype=float))
        if self.q_start.shape != (self.state_dim,):
            raise ValidationError("initial state dimension mismatch")
        for d, label in ((self.state_dim, "state"), (self.control_dim, "control")):
            if d < 1:
                raise ValidationError(f"{label} dimension must be >= 1")
        if self.frac_dim < 0:
            raise ValidationError("fractional control dimension must be >= 0")
        self._validate_contracts()
        self._caputo_matrix_cache = None

    def _validate_contracts(self):
        rng = np.random.default_rng(_PROBE_SEED)
        k = 100
        t = rng.uniform(self.grid.a, self.grid.b, size=k)
        q = rng.standard_normal((k, self.state_dim))
        u = rng.standard_normal((k, self.control_dim))
        mu = rng.standard_normal((k, self.frac_dim))
        _fd_check("cost_dq", self.cost_dq, self.cost, [t, q, u, mu], 1, self.state_dim)
        _fd_check("cost_du", self.cost_du, self.cost, [t, q, u, mu], 2, self.control_dim)
        if self.frac_dim:
            _fd_check("cost_dmu", self.cost_dmu, self.cost, [t, q, u, mu], 3, self.frac_dim)
        _fd_check("velocity_dq", self.velocity_dq, self.velocity, [t, q, u], 1, self.state_dim)
        _fd_check("velocity_du", self.velocity_du, self.velocity, [t, q, u], 2, self.control_dim)
        _fd_check(
            "frac_velocity_dq", self.frac_velocity_dq, self.frac_velocity, [t, q, mu], 1, self.state_dim
        )
        if self.frac_dim:
            _fd_check(
                "frac_velocity_dmu",
                self.frac_velocity_dmu,
                self.frac_velocity,
                [t, q, mu],
                2,
                self.frac_dim,
            )

    def caputo_matrix(self) -> np.ndarray:
        if self._caputo_matrix_cache is None:
            self._caputo_matrix_cache = caputo_left_matrix(self.grid.n, self.grid.h, self.alpha)
        return self._caputo_matrix_cache


@dataclass
class SolveDiagnostics:
    penalty_weights: list
    defect_norms: list  # combined dynamics defect L2 norm per round
    gradient_norm: float
    iterations: int


@dataclass
class PontryaginState:
    """State/control trajectories with the recovered co-vector functions."""

    q: GridFunction
    u: GridFunction
    mu: GridFunction
    p: GridFunction
    p_alpha: GridFunction
    diagnostics: Optional[SolveDiagnostics] = None


def _state_arrays(cp: ControlProblem, state: PontryaginState):
    for f, label, d in (
        (state.q, "q", cp.state_dim),
        (state.u, "u", cp.control_dim),
        (state.mu, "mu", cp.frac_dim),
        (state.p, "p", cp.state_dim),
        (state.p_alpha, "p_alpha", cp.state_dim),
    ):
        if f.grid != cp.grid:
            raise ValidationError(f"{label} does not live on the problem grid")
        if label == "mu":
            if d and f.dim != d:
                raise ValidationError(f"mu dimension {f.dim} != {d}")
        elif f.dim != d:
            raise ValidationError(f"{label} dimension {f.dim} != {d}")
    scale = 1.0 + float(np.max(np.abs(state.q.values)))
    if np.max(np.abs(state.q.values[0] - cp.q_start)) > 1e-12 * scale:
        raise ValidationError("state does not satisfy the initial condition")
    mu_vals = state.mu.values if cp.frac_dim else np.zeros((cp.grid.n + 1, 0))
    return state.q.values, state.u.values, mu_vals, state.p.values, state.p_alpha.values


def hamiltonian(cp: ControlProblem, state: PontryaginState, t_index: int) -> float:
    """H = L + p . phi + p_alpha . rho at one node."""
    q, u, mu, p, pa = _state_arrays(cp, state)
    if not 0 <= t_index <= cp.grid.n:
        raise ValidationError(f"node index {t_index} outside the grid")
    return float(_hamiltonian_values(cp, q, u, mu, p, pa)[t_index])


def _hamiltonian_values(cp, q, u, mu, p, pa) -> np.ndarray:
    t = cp.grid.nodes()
    lvals = np.asarray(cp.cost(t, q, u, mu), dtype=float)
    phi = np.asarray(cp.velocity(t, q, u), dtype=float)
    rho = np.asarray(cp.frac_velocity(t, q, mu), dtype=float)
    return lvals + np.sum(p * phi, axis=1) + np.sum(pa * rho, axis=1)


def pontryagin_residuals(cp: ControlProblem, state: PontryaginState):
    """Five node-wise residual functions of the stationarity structure.

    (i)   dH/dp - dq/dt            = phi - dq/dt
    (ii)  dH/dp_alpha - D_C^alpha q = rho - D_C^alpha q
    (iii) dH/dq + dp/dt - D_right^alpha p_alpha
    (iv)  dH/du
    (v)   dH/dmu

    Endpoint nodes are zeroed (interior-only contract).
    """
    q, u, mu, p, pa = _state_arrays(cp, state)
    t = cp.grid.nodes()
    h = cp.grid.h
    phi = np.asarray(cp.velocity(t, q, u), dtype=float)
    rho = np.asarray(cp.frac_velocity(t, q, mu), dtype=float)
    res1 = phi - central_difference(q, h)
    res2 = rho - caputo_left(GridFunction(cp.grid, q), cp.alpha).values
    dhdq = (
        np.asarray(cp.cost_dq(t, q, u, mu), dtype=float)
        + np.einsum("kij,ki->kj", np.asarray(cp.velocity_dq(t, q, u), float), p)
        + np.einsum("kij,ki->kj", np.asarray(cp.frac_velocity_dq(t, q, mu), float), pa)
    )
    rl_pa = rl_derivative_right(GridFunction(cp.grid, pa), cp.alpha).values
    res3 = dhdq + central_difference(p, h) - rl_pa
    res4 = np.asarray(cp.cost_du(t, q, u, mu), dtype=float) + np.einsum(
        "kij,ki->kj", np.asarray(cp.velocity_du(t, q, u), float), p
    )
    if cp.frac_dim:
        res5 = np.asarray(cp.cost_dmu(t, q, u, mu), dtype=float) + np.einsum(
            "kij,ki->kj", np.asarray(cp.frac_velocity_dmu(t, q, mu), float), pa
        )
    else:
        res5 = np.zeros((cp.grid.n + 1, 1))
    out = []
    for res in (res1, res2, res3, res4, res5):
        res = np.where(np.isfinite(res), res, 0.0)
        res[0] = 0.0
        res[-1] = 0.0
        out.append(GridFunction(cp.grid, res))
    return tuple(out)


# --------------------------------------------------------------- the solver


def _sbp_difference_matrix(n: int, h: float) -> np.ndarray:
    """Central interior, first-order one-sided ends; adjoint-compatible with
    trapezoid weights, which is what makes the penalty multipliers consistent
    estimates of the adjoint functions."""
    m = np.zeros((n + 1, n + 1))
    idx = np.arange(1, n)
    m[idx, idx + 1] = 1.0 / (2.0 * h)
    m[idx, idx - 1] = -1.0 / (2.0 * h)
    m[0, 0], m[0, 1] = -1.0 / h, 1.0 / h
    m[n, n], m[n, n - 1] = 1.0 / h, -1.0 / h
    return m


def solve_control(
    cp: ControlProblem,
    base_weight: float = 100.0,
    rounds: int = 3,
    tol: float = 1e-6,
    max_iter: int | None = None,
    terminal_state=None,
) -> PontryaginState:
    """Penalty-based direct transcription with adjoint recovery.

    Decision variables: trajectory nodes 1..n (node 0 carries the initial
    condition) plus every control node of u and mu. Three penalty rounds by
    default, weight growing tenfold per round, warm-started; the combined
    dynamics defect must decrease across rounds or the dynamics are reported
    infeasible. ``terminal_state`` adds an optional endpoint penalty.
    """
    n, sd, md, dd = cp.grid.n, cp.state_dim, cp.control_dim, cp.frac_dim
    if max(sd, md, dd) > 4:
        raise ValidationError("solver supports dimensions up to 4 per channel")
    if n > 2048:
        raise ValidationError("solver supports grids up to n = 2048")
    h = cp.grid.h
    t = cp.grid.nodes()
    wt = trapezoid_weights(n, h)
    dmat = _sbp_difference_matrix(n, h)
    cmat = cp.caputo_matrix()
    q_goal = None
    if terminal_state is not None:
        q_goal = np.atleast_1d(np.asarray(terminal_state, dtype=float))
        if q_goal.shape != (sd,):
            raise ValidationError("terminal state dimension mismatch")

    nq = n * sd
    nu = (n + 1) * md
    nmu = (n + 1) * dd

    def split(z):
        q = np.empty((n + 1, sd))
        q[0] = cp.q_start
        q[1:] = z[:nq].reshape(n, sd)
        u = z[nq : nq + nu].reshape(n + 1, md)
        mu = z[nq + nu :].reshape(n + 1, dd)
        return q, u, mu

    def defects(q, u, mu):
        e1 = dmat @ q - np.asarray(cp.velocity(t, q, u), dtype=float)
        e2 = cmat @ q - np.asarray(cp.frac_velocity(t, q, mu), dtype=float)
        return e1, e2

    def objective(z, weight):
        q, u, mu = split(z)
        lvals = np.asarray(cp.cost(t, q, u, mu), dtype=float)
        e1, e2 = defects(q, u, mu)
        value = float(wt @ lvals)
        value += 0.5 * weight * float(wt @ np.sum(e1 * e1 + e2 * e2, axis=1))
        if q_goal is not None:
            value += 0.5 * weight * float(np.sum((q[-1] - q_goal) ** 2))
        return value

    def gradient(z, weight):
        q, u, mu = split(z)
        e1, e2 = defects(q, u, mu)
        wt_e1 = wt[:, None] * e1
        wt_e2 = wt[:, None] * e2
        gq = wt[:, None] * np.asarray(cp.cost_dq(t, q, u, mu), dtype=float)
        gq += weight * (dmat.T @ wt_e1)
        gq -= weight * np.einsum("kij,ki->kj", np.asarray(cp.velocity_dq(t, q, u), float), wt_e1)
        gq += weight * (cmat.T @ wt_e2)
        gq -= weight * np.einsum(
            "kij,ki->kj", np.asarray(cp.frac_velocity_dq(t, q, mu), float), wt_e2
        )
        if q_goal is not None:
            gq[-1] += weight * (q[-1] - q_goal)
        gu = wt[:, None] * np.asarray(cp.cost_du(t, q, u, mu), dtype=float)
        gu -= weight * np.einsum("kij,ki->kj", np.asarray(cp.velocity_du(t, q, u), float), wt_e1)
        if dd:
            gmu = wt[:, None] * np.asarray(cp.cost_dmu(t, q, u, mu), dtype=float)
            gmu -= weight * np.einsum(
                "kij,ki->kj", np.asarray(cp.frac_velocity_dmu(t, q, mu), float), wt_e2
            )
        else:
            gmu = np.zeros((n + 1, 0))
        return np.concatenate([gq[1:].ravel(), gu.ravel(), gmu.ravel()])

    z = np.zeros(nq + nu + nmu)
    q0, u0, mu0 = split(z)
    q0[1:] = cp.q_start[None, :]
    z[:nq] = q0[1:].ravel()
    if max_iter is None:
        max_iter = max(4000, 500 * len(z))

    weights, defect_norms = [], []
    result = None
    for k in range(rounds):
        weight = base_weight * 10.0**k
        result = bfgs_minimize(
            lambda zz: objective(zz, weight),
            lambda zz: gradient(zz, weight),
            z,
            tol=tol,
            max_iter=max_iter,
        )
        z = result.x
        q, u, mu = split(z)
        e1, e2 = defects(q, u, mu)
        norm = float(np.sqrt(wt @ np.sum(e1 * e1 + e2 * e2, axis=1)))
        weights.append(weight)
        defect_norms.append(norm)
    # a tenfold weight increase should shrink a feasible defect about
    # tenfold; treat anything not clearly decreasing as infeasible dynamics
    for a, b in zip(defect_norms, defect_norms[1:]):
        if b > 0.66 * a and b > 1e-10:
            raise NumericsError(
                "dynamics penalty defect did not decrease across rounds "
                f"(history {defect_norms}); dynamics look infeasible"
            )
    q, u, mu = split(z)
    e1, e2 = defects(q, u, mu)
    final_weight = weights[-1]
    return PontryaginState(
        q=GridFunction(cp.grid, q),
        u=GridFunction(cp.grid, u),
        mu=GridFunction(cp.grid, mu if dd else np.zeros((n + 1, 1))),
        p=GridFunction(cp.grid, -final_weight * e1),
        p_alpha=GridFunction(cp.grid, -final_weight * e2),
        diagnostics=SolveDiagnostics(
            penalty_weights=weights,
            defect_norms=defect_norms,
            gradient_norm=result.gradient_norm,
            iterations=result.iterations,
        ),
    )


# ----------------------------------------------------- conserved quantities


def control_noether_quantity(
    cp: ControlProblem, state: PontryaginState, s: SymmetryGroup, truncation: int = 2
) -> GridFunction:
    """Hamiltonian-form candidate conserved quantity along a solved state.

    C(t) = -f2 . p
         - sum_{r=0}^{R} [ (-1)^r p_alpha^(r) . I_left^(r+1-alpha)(f2 - f2(a))
                           + f2^(r) . I_right^(r+1-alpha) p_alpha ]
         + tau (H - (1 - alpha) p_alpha . D_C^alpha q)
    """
    truncation = _check_truncation(truncation)
    if s.dim != cp.state_dim:
        raise ValidationError(f"symmetry dimension {s.dim} != state dimension {cp.state_dim}")
    q, u, mu, p, pa = _state_arrays(cp, state)
    t = cp.grid.nodes()
    tau, f2 = s.rates_on(t, q)
    series = _series_terms(f2, pa, cp.grid, cp.alpha, truncation).sum(axis=0)
    cap_q = caputo_left(GridFunction(cp.grid, q), cp.alpha).values
    ham = _hamiltonian_values(cp, q, u, mu, p, pa)
    corrected = ham - (1.0 - cp.alpha) * np.sum(pa * cap_q, axis=1)
    c = -np.sum(f2 * p, axis=1) - series + tau * corrected
    return GridFunction(cp.grid, c)


def autonomous_control_quantity(cp: ControlProblem, state: PontryaginState) -> GridFunction:
    """H - (1 - alpha) p_alpha . D_C^alpha q; equals H itself at alpha = 1."""
    if not cp.autonomous:
        raise ValidationError("autonomous_control_quantity requires an autonomous problem")
    q, u, mu, p, pa = _state_arrays(cp, state)
    ham = _hamiltonian_values(cp, q, u, mu, p, pa)
    cap_q = caputo_left(GridFunction(cp.grid, q), cp.alpha).values
    c = ham - (1.0 - cp.alpha) * np.sum(pa * cap_q, axis=1)
    return GridFunction(cp.grid, c)


# ------------------------------------------------------ registered families


def variational_reduction(lagrangian, grid: Grid, alpha, q_start) -> ControlProblem:
    """Control form of a variational problem: phi = u, rho = mu.

    Under the substitution u = dq/dt, mu = D_C^alpha q, p = -dL/dv,
    p_alpha = -dL/dw the stationarity residuals reproduce the variational
    Euler-Lagrange residual arithmetic exactly.
    """
    d = lagrangian.dim
    eye = np.eye(d)

    def as_v(t, q, u, mu):
        return lagrangian.evaluate(t, q, u, mu)

    return ControlProblem(
        cost=as_v,
        cost_dq=lambda t, q, u, mu: lagrangian.dq(t, q, u, mu),
        cost_du=lambda t, q, u, mu: lagrangian.dv(t, q, u, mu),
        cost_dmu=lambda t, q, u, mu: lagrangian.dw(t, q, u, mu),
        velocity=lambda t, q, u: u,
        velocity_dq=lambda t, q, u: np.zeros((len(t), d, d)),
        velocity_du=lambda t, q, u: np.broadcast_to(eye, (len(t), d, d)).copy(),
        frac_velocity=lambda t, q, mu: mu,
        frac_velocity_dq=lambda t, q, mu: np.zeros((len(t), d, d)),
        frac_velocity_dmu=lambda t, q, mu: np.broadcast_to(eye, (len(t), d, d)).copy(),
        alpha=alpha,
        grid=grid,
        q_start=q_start,
        state_dim=d,
        control_dim=d,
        frac_dim=d,
        autonomous=lagrangian.autonomous,
        name="reduction-of-variations",
    )


def reduction_state(cp: ControlProblem, q: GridFunction, lagrangian) -> PontryaginState:
    """Substituted state for reduction problems: u = dq/dt, mu = D_C^alpha q,
    p = -dL/dv, p_alpha = -dL/dw."""
    t = cp.grid.nodes()
    u = central_difference(q.values, cp.grid.h)
    mu = caputo_left(q, cp.alpha).values
    p = -np.asarray(lagrangian.dv(t, q.values, u, mu), dtype=float)
    pa = -np.asarray(lagrangian.dw(t, q.values, u, mu), dtype=float)
    return PontryaginState(
        q=q,
        u=GridFunction(cp.grid, u),
        mu=GridFunction(cp.grid, mu),
        p=GridFunction(cp.grid, p),
        p_alpha=GridFunction(cp.grid, pa),
    )


def scalar_tracking_problem(
    grid: Grid,
    alpha,
    q_start: float,
    state_weight: float = 1.0,
    control_weight: float = 1.0,
    frac_weight: float = 1.0,
) -> ControlProblem:
    """Scalar linear-quadratic family: L = (cq q^2 + cu u^2 + cmu mu^2)/2,
    phi = u, rho = mu."""

    def cost(t, q, u, mu):
        return 0.5 * (
            state_weight * q[:, 0] ** 2
            + control_weight * u[:, 0] ** 2
            + frac_weight * mu[:, 0] ** 2
        )

    ones = lambda t: np.ones((len(t), 1, 1))
    zeros = lambda t: np.zeros((len(t), 1, 1))
    return ControlProblem(
        cost=cost,
        cost_dq=lambda t, q, u, mu: state_weight * q,
        cost_du=lambda t, q, u, mu: control_weight * u,
        cost_dmu=lambda t, q, u, mu: frac_weight * mu,
        velocity=lambda t, q, u: u,
        velocity_dq=lambda t, q, u: zeros(t),
        velocity_du=lambda t, q, u: ones(t),
        frac_velocity=lambda t, q, mu: mu,
        frac_velocity_dq=lambda t, q, mu: zeros(t),
        frac_velocity_dmu=lambda t, q, mu: ones(t),
        alpha=alpha,
        grid=grid,
        q_start=[q_start],
        state_dim=1,
        control_dim=1,
        frac_dim=1,
        autonomous=True,
        name="linear-quadratic",
    )
