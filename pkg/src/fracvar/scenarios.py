"""Scenario configs, batch execution, and run manifests.

Scenarios are flat INI files: a ``[scenario]`` section names the kind, and
one kind-specific section carries the parameters. Custom Lagrangians are
limited to the registered coefficient families - configs stay auditable,
there is no expression interpreter. Every run writes CSV artifacts plus a
``manifest.json`` listing each emitted file with its SHA-256 digest; outputs
carry no timestamps, so reruns of the same scenario are byte-identical.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ValidationError
from .friction import (
    FrictionProblem,
    friction_diagnostics,
    simulate_damped_eom,
    window_shrink_study,
)
from .fracops import (
    caputo_left,
    caputo_right,
    rl_derivative_left,
    rl_derivative_right,
    rl_integral_left,
    rl_integral_right,
)
from .grid import CSV_FLOAT_FORMAT, Grid, GridFunction
from .lagrangian import (
    free_particle,
    harmonic_oscillator,
    potential_polynomial,
    quadratic_mix,
)
from .noether import (
    drift_report,
    invariance_defect,
    noether_quantity,
    transfer_series,
)
from .optctrl import (
    autonomous_control_quantity,
    scalar_tracking_problem,
    solve_control,
    variational_reduction,
    _hamiltonian_values,
)
from .symmetry import rotation, space_translation, time_translation
from .variational import VariationalProblem, solve_extremal

KINDS = ("operator-test", "extremal", "noether", "friction", "control")

_OPERATORS = {
    "caputo-left": caputo_left,
    "caputo-right": caputo_right,
    "rl-derivative-left": rl_derivative_left,
    "rl-derivative-right": rl_derivative_right,
    "rl-integral-left": rl_integral_left,
    "rl-integral-right": rl_integral_right,
}


@dataclass
class Scenario:
    kind: str
    parameters: dict
    out_dir: str = "out"


@dataclass
class RunManifest:
    scenario: dict
    version: str
    wall_clock_sec: float
    files: list = field(default_factory=list)  # [{"name": ..., "sha256": ...}]

    def to_json(self) -> str:
        return json.dumps(
            {
                "scenario": self.scenario,
                "version": self.version,
                "wall_clock_sec": self.wall_clock_sec,
                "files": self.files,
            },
            indent=2,
            sort_keys=True,
        )


class _Params:
    """Typed access to one config section with key-named errors."""

    def __init__(self, section: str, data: dict):
        self.section = section
        self.data = dict(data)

    def require(self, key: str) -> str:
        if key not in self.data:
            raise ValidationError(f"scenario is missing required key '{key}'")
        return self.data[key]

    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def number(self, key: str, default=None) -> float:
        raw = self.require(key) if default is None else self.data.get(key, default)
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ValidationError(f"key '{key}' must be a number, got {raw!r}") from None

    def integer(self, key: str, default=None) -> int:
        value = self.number(key, default)
        if int(value) != value:
            raise ValidationError(f"key '{key}' must be an integer, got {value!r}")
        return int(value)

    def vector(self, key: str, default=None) -> np.ndarray:
        raw = self.require(key) if default is None else self.data.get(key, default)
        if isinstance(raw, (int, float)):
            return np.array([float(raw)])
        try:
            return np.array([float(x) for x in str(raw).split(",") if x.strip() != ""])
        except ValueError:
            raise ValidationError(f"key '{key}' must be a comma-separated number list") from None

    def int_list(self, key: str, default=None) -> list:
        vec = self.vector(key, default)
        out = []
        for v in vec:
            if int(v) != v:
                raise ValidationError(f"key '{key}' must list integers")
            out.append(int(v))
        return out


def parse_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"scenario file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ValidationError(f"cannot parse scenario file {path}: {exc}") from None
    if "scenario" not in parser:
        raise ValidationError("scenario file needs a [scenario] section")
    head = dict(parser["scenario"])
    kind = head.get("kind")
    if kind not in KINDS:
        raise ValidationError(f"key 'kind' must be one of {KINDS}, got {kind!r}")
    params = dict(parser[kind]) if kind in parser else {}
    return Scenario(kind=kind, parameters=params, out_dir=head.get("out", "out"))


# ----------------------------------------------------------------- writers


def _write_csv(path: Path, header: list, columns: list) -> None:
    rows = len(columns[0])
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(CSV_FLOAT_FORMAT % col[i] for col in columns) + "\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


# ------------------------------------------------------- builders per kind


def build_lagrangian(params: _Params):
    family = params.require("lagrangian")
    if family == "free":
        return free_particle(dim=params.integer("dim", 1), mass=params.number("mass", 1.0))
    if family == "harmonic":
        return harmonic_oscillator(
            dim=params.integer("dim", 1),
            mass=params.number("mass", 1.0),
            stiffness=params.number("stiffness", 1.0),
        )
    if family == "potential-polynomial":
        coeffs = params.vector("coefficients")
        return potential_polynomial(coeffs, mass=params.number("mass", 1.0))
    if family == "friction":
        mass = params.number("mass", 1.0)
        gamma = params.number("gamma", 1.0)
        coeffs = params.vector("potential", "0")
        fp = _friction_problem_from(mass, gamma, coeffs, Grid(0.0, 1.0, 2))
        from .friction import friction_lagrangian

        return friction_lagrangian(fp)
    if family == "custom-coefficients":
        return quadratic_mix(
            velocity_weight=params.number("velocity_weight", 1.0),
            caputo_weight=params.number("caputo_weight", 0.0),
            state_weight=params.number("state_weight", 0.0),
            state_slope=params.number("state_slope", 0.0),
            dim=params.integer("dim", 1),
        )
    raise ValidationError(f"key 'lagrangian' names an unknown family {family!r}")


def build_symmetry(params: _Params, dim: int):
    family = params.get("symmetry", "time-translation")
    if family == "time-translation":
        return time_translation(dim=dim)
    if family == "space-translation":
        direction = params.vector("direction", "1")
        if len(direction) != dim:
            raise ValidationError("key 'direction' must match the problem dimension")
        return space_translation(direction)
    if family == "rotation":
        if dim != 2:
            raise ValidationError("key 'symmetry' = rotation needs a 2-dimensional problem")
        return rotation(params.number("omega", 1.0))
    raise ValidationError(f"key 'symmetry' names an unknown family {family!r}")


def _friction_problem_from(mass, gamma, coeffs, window):
    c = np.asarray(coeffs, dtype=float)
    dc = c[1:] * np.arange(1, len(c)) if len(c) > 1 else np.zeros(0)

    def u(q):
        return np.polyval(c[::-1], q) if len(c) else np.zeros_like(q)

    def du(q):
        return np.polyval(dc[::-1], q) if len(dc) else np.zeros_like(q)

    return FrictionProblem(mass, gamma, u, du, window)


def _variational_problem(params: _Params) -> VariationalProblem:
    lag = build_lagrangian(params)
    alpha = params.number("alpha")
    grid = Grid(params.number("a", 0.0), params.number("b", 1.0), params.integer("n"))
    q_a = params.vector("q_a")
    q_b = params.vector("q_b")
    if len(q_a) != lag.dim or len(q_b) != lag.dim:
        raise ValidationError("keys 'q_a'/'q_b' must match the Lagrangian dimension")
    return VariationalProblem(lag, grid, alpha, (q_a, q_b))


# -------------------------------------------------------------- executors


def _power_reference(operator: str, exponent: int, alpha: float, grid: Grid) -> np.ndarray:
    """Closed-form operator values for the monomial test family."""
    from .special import gamma as gamma_fn

    t = grid.nodes()
    k = float(exponent)
    left_x = t - grid.a
    right_x = grid.b - t
    if operator == "caputo-left":
        return gamma_fn(k + 1.0) / gamma_fn(k + 1.0 - alpha) * left_x ** (k - alpha)
    if operator == "caputo-right":
        return gamma_fn(k + 1.0) / gamma_fn(k + 1.0 - alpha) * right_x ** (k - alpha)
    if operator == "rl-integral-left":
        return gamma_fn(k + 1.0) / gamma_fn(k + 1.0 + alpha) * left_x ** (k + alpha)
    if operator == "rl-integral-right":
        return gamma_fn(k + 1.0) / gamma_fn(k + 1.0 + alpha) * right_x ** (k + alpha)
    if operator == "rl-derivative-left":
        # monomial vanishes at t = a, so this equals the Caputo value
        return gamma_fn(k + 1.0) / gamma_fn(k + 1.0 - alpha) * left_x ** (k - alpha)
    if operator == "rl-derivative-right":
        return gamma_fn(k + 1.0) / gamma_fn(k + 1.0 - alpha) * right_x ** (k - alpha)
    raise ValidationError(f"key 'operator' names an unknown operator {operator!r}")


def _operator_error(operator: str, exponent: int, alpha: float, grid: Grid) -> float:
    t = grid.nodes()
    base = (t - grid.a) if not operator.endswith("right") else (grid.b - t)
    f = GridFunction(grid, base ** float(exponent))
    out = _OPERATORS[operator](f, alpha).column()
    ref = _power_reference(operator, exponent, alpha, grid)
    mask = np.isfinite(out)
    return float(np.max(np.abs(out[mask] - ref[mask])))


def _run_operator_test(params: _Params, out: Path) -> list:
    operator = params.require("operator")
    if operator not in _OPERATORS:
        raise ValidationError(f"key 'operator' names an unknown operator {operator!r}")
    alpha = params.number("alpha")
    a = params.number("a", 0.0)
    b = params.number("b", 1.0)
    exponent = params.integer("exponent", 2)
    grids = params.int_list("grids", "64,128,256,512")
    errors = [_operator_error(operator, exponent, alpha, Grid(a, b, n)) for n in grids]
    cols = [np.array(grids, dtype=float), np.array([(b - a) / n for n in grids]), np.array(errors)]
    header = ["n", "h", "max_error"]
    if len(grids) >= 2:
        orders = [np.nan] + [
            np.log2(errors[i] / errors[i + 1]) if errors[i + 1] > 0 else np.nan
            for i in range(len(errors) - 1)
        ]
        header.append("observed_order")
        cols.append(np.array(orders))
    _write_csv(out / "convergence.csv", header, cols)
    return [out / "convergence.csv"]


def _solution_files(problem, sol, out: Path) -> list:
    sol.to_csv(out / "solution.csv")
    _write_csv(
        out / "summary.csv",
        ["action", "el_residual_norm", "gradient_norm", "iterations"],
        [
            np.array([sol.action]),
            np.array([sol.el_residual_norm]),
            np.array([sol.gradient_norm]),
            np.array([float(sol.iterations)]),
        ],
    )
    return [out / "solution.csv", out / "summary.csv"]


def _run_extremal(params: _Params, out: Path, tol) -> list:
    problem = _variational_problem(params)
    sol = solve_extremal(problem, tol=tol if tol else params.number("tolerance", 1e-8))
    return _solution_files(problem, sol, out)


def _run_noether(params: _Params, out: Path, tol, truncation) -> list:
    problem = _variational_problem(params)
    sol = solve_extremal(problem, tol=tol if tol else params.number("tolerance", 1e-8))
    symmetry = build_symmetry(params, problem.dim)
    r = truncation if truncation is not None else params.integer("truncation", 2)
    quantity = noether_quantity(problem, sol, symmetry, truncation=r)
    series = transfer_series(
        GridFunction(problem.grid, symmetry.rates_on(problem.grid.nodes(), sol.trajectory.values)[1]),
        GridFunction(
            problem.grid,
            np.asarray(
                problem.lagrangian.dw(
                    problem.grid.nodes(),
                    sol.trajectory.values,
                    sol.velocity.values,
                    sol.caputo_velocity.values,
                ),
                dtype=float,
            ),
        ),
        problem.alpha,
        r,
    )
    defect = invariance_defect(
        problem,
        sol.trajectory,
        symmetry,
        time_transform=symmetry.name == "time-translation",
    )
    files = _solution_files(problem, sol, out)
    t = problem.grid.nodes()
    _write_csv(out / "invariant.csv", ["t", "c"], [t, quantity.values[:, 0]])
    tau, f2 = symmetry.rates_on(t, sol.trajectory.values)
    _write_csv(
        out / "symmetry.csv",
        ["t", "tau"] + [f"f2_{j}" for j in range(problem.dim)],
        [t, tau] + [f2[:, j] for j in range(problem.dim)],
    )
    _write_csv(
        out / "noether_summary.csv",
        ["drift", "invariance_defect", "tail_estimate"],
        [
            np.array([drift_report(quantity)]),
            np.array([defect]),
            np.array([series.tail_estimate]),
        ],
    )
    return files + [out / "invariant.csv", out / "symmetry.csv", out / "noether_summary.csv"]


def _run_friction(params: _Params, out: Path) -> list:
    mass = params.number("mass", 1.0)
    gamma = params.number("gamma")
    coeffs = params.vector("potential", "0")
    window = Grid(
        params.number("window_a", 0.0),
        params.number("window_b", 1.0),
        params.integer("window_n", 512),
    )
    fp = _friction_problem_from(mass, gamma, coeffs, window)
    sim = simulate_damped_eom(
        fp,
        q0=params.number("q0", 0.0),
        v0=params.number("v0", 1.0),
        horizon=params.number("horizon", 1.0),
        steps=params.integer("steps", 1024),
    )
    t_sim = sim.grid.nodes()
    _write_csv(out / "trajectory.csv", ["t", "q", "qdot"], [t_sim, sim.values[:, 0], sim.values[:, 1]])

    q_window = GridFunction.from_callable(
        window, lambda t: np.interp(t, t_sim, sim.values[:, 0])
    )
    diag = friction_diagnostics(fp, q_window)
    t_win = window.nodes()
    _write_csv(
        out / "diagnostics.csv",
        ["t", "p", "p_half", "hamiltonian", "noether_defect"],
        [
            t_win,
            diag.momentum.values[:, 0],
            diag.half_momentum.values[:, 0],
            diag.hamiltonian.values[:, 0],
            diag.noether_defect.values[:, 0],
        ],
    )

    count = params.integer("shrink_windows", 5)
    center = 0.5 * (window.a + window.b)
    base = (window.b - window.a) / 2.0
    windows = [
        Grid(center - base / 2**k / 2.0, center + base / 2**k / 2.0, 256) for k in range(count)
    ]
    table = window_shrink_study(fp, lambda t: np.interp(t, t_sim, sim.values[:, 0]), windows)
    _write_csv(
        out / "window_table.csv",
        ["delta_t", "friction_energy", "first_order", "ratio", "half_momentum_mid"],
        [table[k] for k in ("delta_t", "friction_energy", "first_order", "ratio", "half_momentum_mid")],
    )
    return [out / "trajectory.csv", out / "diagnostics.csv", out / "window_table.csv"]


def _control_problem(params: _Params, grid: Grid):
    family = params.get("family", "linear-quadratic")
    alpha = params.number("alpha")
    if family == "linear-quadratic":
        return scalar_tracking_problem(
            grid,
            alpha,
            q_start=params.number("q_a"),
            state_weight=params.number("state_weight", 1.0),
            control_weight=params.number("control_weight", 1.0),
            frac_weight=params.number("frac_weight", 1.0),
        )
    if family == "reduction-of-variations":
        lag = build_lagrangian(params)
        q_start = params.vector("q_a")
        return variational_reduction(lag, grid, alpha, q_start)
    raise ValidationError(f"key 'family' names an unknown control family {family!r}")


def _run_control(params: _Params, out: Path, tol, truncation) -> list:
    grid = Grid(params.number("a", 0.0), params.number("b", 1.0), params.integer("n"))
    cp = _control_problem(params, grid)
    terminal = params.get("terminal")
    terminal_vec = None if terminal is None else params.vector("terminal")
    state = solve_control(cp, tol=tol if tol else 1e-6, terminal_state=terminal_vec)
    quantity = autonomous_control_quantity(cp, state)
    ham = _hamiltonian_values(
        cp,
        state.q.values,
        state.u.values,
        state.mu.values if cp.frac_dim else np.zeros((grid.n + 1, 0)),
        state.p.values,
        state.p_alpha.values,
    )
    t = cp.grid.nodes()
    header = ["t"]
    cols = [t]
    for label, gf in (("q", state.q), ("u", state.u), ("mu", state.mu), ("p", state.p), ("p_alpha", state.p_alpha)):
        for j in range(gf.dim):
            header.append(f"{label}{j}")
            cols.append(gf.values[:, j])
    header += ["hamiltonian", "invariant"]
    cols += [ham, quantity.values[:, 0]]
    _write_csv(out / "control.csv", header, cols)
    _write_csv(
        out / "summary.csv",
        ["final_defect", "invariant_drift", "iterations"],
        [
            np.array([state.diagnostics.defect_norms[-1]]),
            np.array([drift_report(quantity)]),
            np.array([float(state.diagnostics.iterations)]),
        ],
    )
    return [out / "control.csv", out / "summary.csv"]


# ------------------------------------------------------------ entry points


def run_scenario(
    scenario: Scenario, out_dir=None, tol: float | None = None, truncation: int | None = None
) -> RunManifest:
    start = time.monotonic()
    out = Path(out_dir if out_dir is not None else scenario.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = _Params(scenario.kind, scenario.parameters)
    if scenario.kind == "operator-test":
        files = _run_operator_test(params, out)
    elif scenario.kind == "extremal":
        files = _run_extremal(params, out, tol)
    elif scenario.kind == "noether":
        files = _run_noether(params, out, tol, truncation)
    elif scenario.kind == "friction":
        files = _run_friction(params, out)
    elif scenario.kind == "control":
        files = _run_control(params, out, tol, truncation)
    else:  # pragma: no cover - parse_scenario guards this
        raise ValidationError(f"unknown scenario kind {scenario.kind!r}")
    # manifest completeness: include anything present in the directory
    emitted = {f.name for f in files}
    for extra in sorted(out.iterdir()):
        if extra.is_file() and extra.name != "manifest.json":
            emitted.add(extra.name)
    manifest = RunManifest(
        scenario={"kind": scenario.kind, **scenario.parameters},
        version=__version__,
        wall_clock_sec=time.monotonic() - start,
        files=[{"name": name, "sha256": _sha256(out / name)} for name in sorted(emitted)],
    )
    (out / "manifest.json").write_text(manifest.to_json(), encoding="ascii")
    return manifest


def run(scenario_file, out_dir=None, tol=None, truncation=None) -> RunManifest:
    """Parse and execute one scenario file."""
    return run_scenario(parse_scenario(scenario_file), out_dir, tol, truncation)


def _study_metric(scenario: Scenario, n: int) -> float:
    """Re-run the scenario at resolution n and return its headline metric."""
    params = dict(scenario.parameters)
    kind = scenario.kind
    p = _Params(kind, params)
    if kind == "operator-test":
        return _operator_error(
            p.require("operator"),
            p.integer("exponent", 2),
            p.number("alpha"),
            Grid(p.number("a", 0.0), p.number("b", 1.0), n),
        )
    if kind == "extremal":
        params["n"] = str(n)
        problem = _variational_problem(_Params(kind, params))
        return solve_extremal(problem).el_residual_norm
    if kind == "noether":
        params["n"] = str(n)
        pn = _Params(kind, params)
        problem = _variational_problem(pn)
        sol = solve_extremal(problem)
        symmetry = build_symmetry(pn, problem.dim)
        quantity = noether_quantity(problem, sol, symmetry, truncation=pn.integer("truncation", 2))
        return drift_report(quantity)
    if kind == "friction":
        params["window_n"] = str(n)
        pn = _Params(kind, params)
        fp = _friction_problem_from(
            pn.number("mass", 1.0),
            pn.number("gamma"),
            pn.vector("potential", "0"),
            Grid(pn.number("window_a", 0.0), pn.number("window_b", 1.0), n),
        )
        sim = simulate_damped_eom(
            fp,
            q0=pn.number("q0", 0.0),
            v0=pn.number("v0", 1.0),
            horizon=pn.number("horizon", 1.0),
            steps=pn.integer("steps", 1024),
        )
        t_sim = sim.grid.nodes()
        q_window = GridFunction.from_callable(
            fp.window, lambda t: np.interp(t, t_sim, sim.values[:, 0])
        )
        return drift_report(friction_diagnostics(fp, q_window).hamiltonian)
    if kind == "control":
        pn = _Params(kind, params)
        grid = Grid(pn.number("a", 0.0), pn.number("b", 1.0), n)
        cp = _control_problem(pn, grid)
        state = solve_control(cp)
        return drift_report(autonomous_control_quantity(cp, state))
    raise ValidationError(f"unknown scenario kind {kind!r}")  # pragma: no cover


def convergence_study(scenario_file, grid_list, out_dir=None) -> RunManifest:
    """Re-run a scenario across resolutions; emit metric vs n with ratios."""
    scenario = parse_scenario(scenario_file)
    if not grid_list:
        raise ValidationError("study needs at least one grid size")
    start = time.monotonic()
    out = Path(out_dir if out_dir is not None else scenario.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics = [_study_metric(scenario, n) for n in grid_list]
    header = ["n", "metric"]
    cols = [np.array(grid_list, dtype=float), np.array(metrics)]
    if len(grid_list) >= 2:
        ratios = [np.nan] + [
            np.log2(metrics[i] / metrics[i + 1]) if metrics[i + 1] > 0 else np.nan
            for i in range(len(metrics) - 1)
        ]
        header.append("log2_ratio")
        cols.append(np.array(ratios))
    _write_csv(out / "study.csv", header, cols)
    files = ["study.csv"]
    manifest = RunManifest(
        scenario={"kind": scenario.kind, "grids": ",".join(str(n) for n in grid_list), **scenario.parameters},
        version=__version__,
        wall_clock_sec=time.monotonic() - start,
        files=[{"name": name, "sha256": _sha256(out / name)} for name in files],
    )
    (out / "manifest.json").write_text(manifest.to_json(), encoding="ascii")
    return manifest
