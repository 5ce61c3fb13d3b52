"""Lagrangian evaluation contracts L(t, q, v, w) and registered families.

``v`` is the classical velocity and ``w`` the fractional (Caputo) velocity.
All contracts are vectorized over nodes: ``t`` has shape (k,), the state
arguments (k, dim), and ``evaluate`` returns (k,) while each partial returns
(k, dim). Analytic partials are validated against central finite differences
on seeded random probes at construction; missing partials fall back to
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ValidationError

_PROBE_SEED = 1693
_FD_STEP = 1e-6
_VALIDATE_RTOL = 1e-5

Evaluator = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
Partial = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _fd_partial(evaluate: Evaluator, slot: int) -> Partial:
    """Central finite-difference partial in argument ``slot`` (1=q, 2=v, 3=w)."""

    def partial(t, q, v, w):
        args = [np.asarray(q, float), np.asarray(v, float), np.asarray(w, float)]
        x = args[slot - 1]
        out = np.empty_like(x)
        for j in range(x.shape[1]):
            step = _FD_STEP * (1.0 + np.abs(x[:, j]))
            hi = [a.copy() for a in args]
            lo = [a.copy() for a in args]
            hi[slot - 1][:, j] += step
            lo[slot - 1][:, j] -= step
            out[:, j] = (evaluate(t, *hi) - evaluate(t, *lo)) / (2.0 * step)
        return out

    return partial


@dataclass
class LagrangianSpec:
    """Contract for L(t, q, v, w) with partials in q, v and w.

    ``autonomous`` declares that ``t`` never enters the evaluation; the
    conserved-quantity machinery requires it for the energy-style invariant.
    """

    dim: int
    evaluate: Evaluator
    dq: Optional[Partial] = None
    dv: Optional[Partial] = None
    dw: Optional[Partial] = None
    autonomous: bool = False
    name: str = "custom"
    _validated: bool = field(default=False, repr=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValidationError(f"dim must be a positive integer, got {self.dim}")
        self.dim = int(self.dim)
        analytic = [(s, p) for s, p in ((1, self.dq), (2, self.dv), (3, self.dw)) if p]
        if self.dq is None:
            self.dq = _fd_partial(self.evaluate, 1)
        if self.dv is None:
            self.dv = _fd_partial(self.evaluate, 2)
        if self.dw is None:
            self.dw = _fd_partial(self.evaluate, 3)
        self._check_partials(analytic)
        self._validated = True

    def _check_partials(self, analytic) -> None:
        if not analytic:
            return
        rng = np.random.default_rng(_PROBE_SEED)
        k = 16
        t = rng.uniform(0.0, 1.0, size=k)
        q = rng.standard_normal((k, self.dim))
        v = rng.standard_normal((k, self.dim))
        w = rng.standard_normal((k, self.dim))
        for slot, partial in analytic:
            got = np.asarray(partial(t, q, v, w), float)
            ref = _fd_partial(self.evaluate, slot)(t, q, v, w)
            tol = _VALIDATE_RTOL * (1.0 + np.maximum(np.abs(got), np.abs(ref)))
            if not np.all(np.abs(got - ref) <= tol):
                where = int(np.argmax(np.abs(got - ref) - tol))
                raise ValidationError(
                    f"analytic partial {('dq', 'dv', 'dw')[slot - 1]} of Lagrangian "
                    f"{self.name!r} disagrees with finite differences "
                    f"(worst probe index {where})"
                )


# -------------------------------------------------------------- families


def free_particle(dim: int = 1, mass: float = 1.0) -> LagrangianSpec:
    """L = m |v|^2 / 2."""

    def evaluate(t, q, v, w):
        return 0.5 * mass * np.sum(v * v, axis=1)

    return LagrangianSpec(
        dim=dim,
        evaluate=evaluate,
        dq=lambda t, q, v, w: np.zeros_like(q),
        dv=lambda t, q, v, w: mass * v,
        dw=lambda t, q, v, w: np.zeros_like(w),
        autonomous=True,
        name="free",
    )


def harmonic_oscillator(dim: int = 1, mass: float = 1.0, stiffness: float = 1.0) -> LagrangianSpec:
    """L = m |v|^2 / 2 - k |q|^2 / 2."""

    def evaluate(t, q, v, w):
        return 0.5 * mass * np.sum(v * v, axis=1) - 0.5 * stiffness * np.sum(q * q, axis=1)

    return LagrangianSpec(
        dim=dim,
        evaluate=evaluate,
        dq=lambda t, q, v, w: -stiffness * q,
        dv=lambda t, q, v, w: mass * v,
        dw=lambda t, q, v, w: np.zeros_like(w),
        autonomous=True,
        name="harmonic",
    )


def potential_polynomial(coeffs: Sequence[float], mass: float = 1.0) -> LagrangianSpec:
    """Scalar L = m v^2 / 2 - U(q) with U(q) = sum_k coeffs[k] q^k."""
    c = np.asarray(coeffs, dtype=float)
    dc = c[1:] * np.arange(1, len(c))

    def u(q):
        return np.polyval(c[::-1], q)

    def du(q):
        return np.polyval(dc[::-1], q) if len(dc) else np.zeros_like(q)

    def evaluate(t, q, v, w):
        return 0.5 * mass * v[:, 0] ** 2 - u(q[:, 0])

    return LagrangianSpec(
        dim=1,
        evaluate=evaluate,
        dq=lambda t, q, v, w: -du(q),
        dv=lambda t, q, v, w: mass * v,
        dw=lambda t, q, v, w: np.zeros_like(w),
        autonomous=True,
        name="potential-polynomial",
    )


def quadratic_mix(
    velocity_weight: float = 1.0,
    caputo_weight: float = 0.0,
    state_weight: float = 0.0,
    state_slope: float = 0.0,
    dim: int = 1,
) -> LagrangianSpec:
    """L = cv |v|^2/2 + cw |w|^2/2 + cq |q|^2/2 + s . sum(q).

    The coefficient family behind the ``custom-coefficients`` scenario kind;
    covers the purely fractional kinetic Lagrangians used in the refinement
    studies.
    """
    cv, cw, cq, s = velocity_weight, caputo_weight, state_weight, state_slope

    def evaluate(t, q, v, w):
        return (
            0.5 * cv * np.sum(v * v, axis=1)
            + 0.5 * cw * np.sum(w * w, axis=1)
            + 0.5 * cq * np.sum(q * q, axis=1)
            + s * np.sum(q, axis=1)
        )

    return LagrangianSpec(
        dim=dim,
        evaluate=evaluate,
        dq=lambda t, q, v, w: cq * q + s,
        dv=lambda t, q, v, w: cv * v,
        dw=lambda t, q, v, w: cw * w,
        autonomous=True,
        name="custom-coefficients",
    )
