"""Uniform grids, sampled functions on them, and fractional orders.

``GridFunction`` is the substrate every operator in the package works on:
vector-valued samples on the nodes ``t_i = a + i*h`` of a uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GridMismatchError, ValidationError

#: printf format used for all CSV output; round-trips IEEE doubles exactly.
CSV_FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` intervals on ``[a, b]``."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValidationError("grid endpoints must be finite")
        if not self.a < self.b:
            raise ValidationError(f"grid requires a < b, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"grid requires an integer n >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.n + 1)


@dataclass(frozen=True)
class FractionalOrder:
    """Order of a fractional operator.

    Derivatives require 0 < alpha <= 1; integrals accept any alpha > 0
    (the transfer-series machinery needs orders r + 1 - alpha > 1).
    The value is stored exactly as given; nothing is snapped to 1.
    """

    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha <= 0.0:
            raise ValidationError(f"fractional order must be finite and > 0, got {self.alpha}")


def order_value(order) -> float:
    """Accept a FractionalOrder or a bare number; return the float order."""
    if isinstance(order, FractionalOrder):
        return float(order.alpha)
    return float(order)


class GridFunction:
    """Samples of an R^d-valued function on a uniform grid.

    ``values`` has shape ``(n + 1, d)``; scalar data may be passed 1-D and is
    stored as a single column. Non-finite entries are permitted only as the
    flagged-singularity sentinel some operators produce; operator *inputs*
    are checked finite at the call site.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValidationError(f"values must be 1-D or 2-D, got shape {arr.shape}")
        if arr.shape[0] != grid.n + 1:
            raise GridMismatchError(
                f"values length {arr.shape[0]} does not match node count {grid.n + 1}"
            )
        if arr.shape[1] < 1:
            raise ValidationError("values need at least one component")
        self.grid = grid
        self.values = arr

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable) -> "GridFunction":
        """Sample ``fn`` on the grid nodes; ``fn`` maps a time array to values."""
        t = grid.nodes()
        vals = np.asarray(fn(t), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        elif vals.shape[0] != t.shape[0]:
            vals = vals.T
        return cls(grid, vals)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def column(self, j: int = 0) -> np.ndarray:
        return self.values[:, j]

    def __repr__(self) -> str:  # pragma: no cover
        g = self.grid
        return f"GridFunction(n={g.n}, dim={self.dim}, [{g.a}, {g.b}])"

    # -- CSV round trip ------------------------------------------------

    def to_csv(self, path) -> None:
        """Write ``t,v0[,v1,...]`` rows at full double precision."""
        header = "t," + ",".join(f"v{j}" for j in range(self.dim))
        t = self.grid.nodes()
        with open(path, "w", encoding="ascii") as fh:
            fh.write(header + "\n")
            for i in range(self.grid.n + 1):
                row = [CSV_FLOAT_FORMAT % t[i]]
                row += [CSV_FLOAT_FORMAT % v for v in self.values[i]]
                fh.write(",".join(row) + "\n")

    @classmethod
    def read_csv(cls, path) -> "GridFunction":
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().strip().split(",")
            if not header or header[0] != "t":
                raise ValidationError(f"unexpected CSV header in {path}: {header}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        t = data[:, 0]
        n = len(t) - 1
        if n < 2:
            raise ValidationError("CSV must contain at least 3 nodes")
        grid = Grid(float(t[0]), float(t[-1]), n)
        return cls(grid, data[:, 1:])


# -- shared array helpers ---------------------------------------------


def central_difference(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order derivative of nodal samples: central interior, one-sided ends."""
    v = np.asarray(values, dtype=float)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return out


def central_difference_matrix(n: int, h: float) -> np.ndarray:
    """Matrix form of :func:`central_difference` on n+1 nodes."""
    m = np.zeros((n + 1, n + 1))
    idx = np.arange(1, n)
    m[idx, idx + 1] = 1.0 / (2.0 * h)
    m[idx, idx - 1] = -1.0 / (2.0 * h)
    m[0, 0], m[0, 1], m[0, 2] = -3.0 / (2.0 * h), 4.0 / (2.0 * h), -1.0 / (2.0 * h)
    m[n, n], m[n, n - 1], m[n, n - 2] = 3.0 / (2.0 * h), -4.0 / (2.0 * h), 1.0 / (2.0 * h)
    return m


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def trapezoid(values: np.ndarray, h: float, skip_nonfinite: bool = False) -> float:
    """Composite trapezoid rule over the nodes.

    With ``skip_nonfinite`` the flagged-singularity sentinel nodes contribute
    zero; callers use this only where the exact integrand vanishes there.
    """
    v = np.asarray(values, dtype=float)
    if skip_nonfinite:
        v = np.where(np.isfinite(v), v, 0.0)
    w = trapezoid_weights(len(v) - 1, h)
    return float(np.dot(w, v))


def require_same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grids differ: {f.grid} vs {g.grid}")


def require_finite(f: GridFunction, what: str = "input") -> None:
    if not np.isfinite(f.values).all():
        bad = np.argwhere(~np.isfinite(f.values))
        node = int(bad[0][0])
        raise ValidationError(f"{what} contains non-finite values (first at node {node})")
