"""Scenario configs, sweep execution and CSV persistence.

Config files are sectioned key = value text; each section is one scenario.
Unknown keys are rejected with line numbers so misspellings cannot turn
into silent defaults. Output is CSV with full-precision (17 significant
digits) scientific notation and a deterministic comment block; re-running
any scenario reproduces its file byte for byte.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analytic import Analytic2lsParams, filtered_population_closed, gn_recursion, pn_closed_form
from .criterion import n_norm
from .errors import NonConvergentSeriesError, ParseError, TruncationError, ValidationError
from .hilbert import expectation
from .lindblad import RESIDUAL_TOL, build_liouvillian, steady_state, unfiltered_gk
from .models import (
    PRESET_AXES,
    TRUNCATION_RTOL,
    _BUILDERS,
    build_preset,
    bumped_preset,
    verify_truncation,
)
from .photon_stats import CorrelatorLadder, pn_with_flag, unnormalized_ladder
from .sensors import EPSILON_DEFAULT, filtered_gk, filtered_population

SWEEP_AXES = ("filter_linewidth", "pump", "drive", "interaction", "sensor_frequency")
EMITTER_AXES = ("pump", "drive", "interaction")
NORM_ORDER_CAP = 4
# analytic rows extend the correlator ladder beyond the reported orders so
# the p(n) series gets a fair chance to converge; costs nothing in closed form
ANALYTIC_LADDER_DEPTH = 8
# sensor-route cap certificates share their extrapolation systematics between
# the two cap sizes, so the residual gap is truncation plus solver noise
FILTERED_TRUNCATION_RTOL = 1e-4


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    points: int
    scale: str  # "lin" | "log"

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.lo])
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    preset: str
    out: str
    axis: str
    grid: GridSpec
    kind: str = "sweep"
    method: str = "sensor"
    map_axis: str | None = None
    map_grid: GridSpec | None = None
    map_units: str = "gamma"
    norm_order: int = 3
    ladder_depth: int = 5
    filtered: bool = True
    Gamma: float | None = None
    omega_f: float = 0.0
    emission: str | None = None
    epsilon: float = EPSILON_DEFAULT
    residual_tol: float = RESIDUAL_TOL
    truncation_tol: float = TRUNCATION_RTOL
    check_truncation: bool = True
    params: dict = field(default_factory=dict)
    # CLI-level override, not a config-file key
    max_dim: int = 4096


@dataclass
class ResultTable:
    scenario: ScenarioConfig
    columns: list[str]
    rows: list[list]
    comments: list[str]
    error_count: int = 0


# ---------------------------------------------------------------- parsing

_BOOLEANS = {"true": True, "false": False, "yes": True, "no": False}


def _parse_grid(text: str, line: int) -> GridSpec:
    parts = text.split()
    if len(parts) != 4:
        raise ParseError(f"grid needs 'min max points lin|log', got {text!r}", line)
    try:
        lo, hi = float(parts[0]), float(parts[1])
        points = int(parts[2])
    except ValueError as exc:
        raise ParseError(f"malformed grid {text!r}: {exc}", line) from None
    scale = parts[3]
    if scale not in ("lin", "log"):
        raise ParseError(f"grid scale must be lin or log, got {scale!r}", line)
    if points < 1:
        raise ParseError(f"grid needs at least one point, got {points}", line)
    if points == 1:
        if lo != hi:
            raise ParseError("single-point grid must have min = max", line)
    elif not lo < hi:
        raise ParseError(f"grid needs min < max, got {lo} >= {hi}", line)
    if scale == "log" and lo <= 0:
        raise ParseError("log grid needs positive endpoints", line)
    return GridSpec(lo, hi, points, scale)


def _parse_scalar(key: str, raw: str, line: int):
    if key in ("kind",):
        if raw not in ("sweep", "map"):
            raise ParseError(f"kind must be sweep or map, got {raw!r}", line)
        return raw
    if key == "method":
        if raw not in ("sensor", "analytic"):
            raise ParseError(f"method must be sensor or analytic, got {raw!r}", line)
        return raw
    if key in ("axis", "map_axis"):
        if raw not in SWEEP_AXES:
            raise ParseError(f"unknown axis {raw!r}; one of {SWEEP_AXES}", line)
        return raw
    if key == "map_units":
        if raw not in ("gamma", "gamma_sigma"):
            raise ParseError(f"map_units must be gamma or gamma_sigma, got {raw!r}", line)
        return raw
    if key in ("norm_order", "ladder_depth", "n_cap"):
        try:
            return int(raw)
        except ValueError:
            raise ParseError(f"{key} must be an integer, got {raw!r}", line) from None
    if key in ("filtered", "check_truncation"):
        if raw.lower() not in _BOOLEANS:
            raise ParseError(f"{key} must be true or false, got {raw!r}", line)
        return _BOOLEANS[raw.lower()]
    if key in ("Gamma", "omega_f", "epsilon", "residual_tol", "truncation_tol"):
        try:
            return float(raw)
        except ValueError:
            raise ParseError(f"{key} must be a number, got {raw!r}", line) from None
    return raw


_SCALAR_KEYS = (
    "preset", "out", "kind", "method", "axis", "map_axis", "map_units",
    "norm_order", "ladder_depth", "n_cap", "filtered", "check_truncation",
    "Gamma", "omega_f", "epsilon", "residual_tol", "truncation_tol", "emission",
)


def parse_config(text: str) -> list[ScenarioConfig]:
    """All scenarios in a config document, in order of appearance."""
    sections: list[tuple[str, int, dict, dict]] = []
    current: dict | None = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        stripped = rawline.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped[1:-1].strip()
            if not name:
                raise ParseError("empty scenario name", lineno)
            current = {}
            sections.append((name, lineno, current, {}))
            continue
        if "=" not in stripped:
            raise ParseError(f"expected key = value, got {stripped!r}", lineno)
        if current is None:
            raise ParseError("key outside any [scenario] section", lineno)
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        name, secline, keys, overrides = sections[-1]
        if key.startswith("param."):
            pname = key[len("param."):]
            if not pname:
                raise ParseError("empty parameter name", lineno)
            if pname in overrides:
                raise ParseError(f"duplicate parameter {pname!r}", lineno)
            try:
                overrides[pname] = int(raw) if raw.isdigit() else float(raw)
            except ValueError:
                raise ParseError(f"parameter {pname!r} must be numeric, got {raw!r}", lineno) from None
            continue
        if key == "grid" or key == "map_grid":
            if key in keys:
                raise ParseError(f"duplicate key {key!r}", lineno)
            keys[key] = _parse_grid(raw, lineno)
            continue
        if key not in _SCALAR_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in keys:
            raise ParseError(f"duplicate key {key!r}", lineno)
        keys[key] = _parse_scalar(key, raw, lineno)
    if not sections:
        raise ParseError("config contains no scenarios", 1)
    return [_finish_section(*s) for s in sections]


def _finish_section(name: str, line: int, keys: dict, overrides: dict) -> ScenarioConfig:
    for required in ("preset", "out", "axis", "grid"):
        if required not in keys:
            raise ParseError(f"scenario [{name}] is missing {required!r}", line)
    n_cap = keys.pop("n_cap", NORM_ORDER_CAP)
    cfg = ScenarioConfig(name=name, params=overrides, **keys)
    if cfg.preset not in _BUILDERS:
        raise ParseError(f"unknown preset {cfg.preset!r}", line)
    if not 1 <= cfg.norm_order <= n_cap:
        raise ParseError(f"norm_order {cfg.norm_order} outside [1, {n_cap}]", line)
    if cfg.residual_tol != RESIDUAL_TOL:
        raise ParseError(
            f"residual_tol is part of the solver contract ({RESIDUAL_TOL:g})", line
        )
    if cfg.kind == "map":
        if cfg.map_axis is None or cfg.map_grid is None:
            raise ParseError(f"map scenario [{name}] needs map_axis and map_grid", line)
        if cfg.axis not in EMITTER_AXES:
            raise ParseError("map axis must be an emitter parameter axis", line)
        if cfg.map_axis != "filter_linewidth":
            raise ParseError("map_axis must be filter_linewidth", line)
        if not 2 <= cfg.ladder_depth <= 6:
            raise ParseError(f"ladder_depth {cfg.ladder_depth} outside [2, 6]", line)
        if cfg.map_units == "gamma_sigma" and cfg.method != "analytic":
            raise ParseError("gamma_sigma map units exist only on the analytic route", line)
    else:
        if cfg.map_axis is not None or cfg.map_grid is not None:
            raise ParseError("map_axis/map_grid only apply to map scenarios", line)
    if cfg.axis in EMITTER_AXES:
        axes = PRESET_AXES.get(cfg.preset, {})
        if cfg.axis not in axes:
            raise ParseError(
                f"preset {cfg.preset!r} has no {cfg.axis!r} axis; offers {sorted(axes)}", line
            )
    if (
        cfg.kind == "sweep"
        and cfg.filtered
        and cfg.axis != "filter_linewidth"
        and cfg.Gamma is None
    ):
        raise ParseError(f"scenario [{name}] needs Gamma for a fixed filter", line)
    if not cfg.filtered:
        if cfg.axis in ("filter_linewidth", "sensor_frequency"):
            raise ParseError("unfiltered sweeps cannot use a sensor axis", line)
        if cfg.kind == "map":
            raise ParseError("maps are filtered by construction", line)
    if cfg.method == "analytic":
        if cfg.preset != "incoherent-2ls":
            raise ParseError("analytic method exists only for incoherent-2ls", line)
        if cfg.omega_f != 0.0:
            raise ParseError("analytic method is resonant; omega_f must be 0", line)
        if cfg.axis == "sensor_frequency":
            raise ParseError("analytic method cannot sweep sensor_frequency", line)
        if not cfg.filtered and cfg.kind == "sweep":
            raise ParseError("analytic method describes filtered quantities", line)
    return cfg


# ---------------------------------------------------------------- execution

_FLAG_ORDER = ("EPS_NONCONV", "PN_TRUNC", "PN_DIVERG")


def _flags_str(flags: set) -> str:
    err = [f for f in flags if f.startswith("ERROR:")]
    if err:
        return err[0]
    ordered = [f for f in _FLAG_ORDER if f in flags]
    return "+".join(ordered) if ordered else "ok"


def _point_preset(cfg: ScenarioConfig, value: float):
    overrides = dict(cfg.params)
    if cfg.axis in EMITTER_AXES:
        overrides[PRESET_AXES[cfg.preset][cfg.axis]] = value
    return build_preset(cfg.preset, overrides)


def _point_filter(cfg: ScenarioConfig, value: float) -> tuple[float, float]:
    Gamma = value if cfg.axis == "filter_linewidth" else cfg.Gamma
    omega = value if cfg.axis == "sensor_frequency" else cfg.omega_f
    return float(Gamma), float(omega)


def _analytic_params(cfg: ScenarioConfig, value: float, Gamma: float) -> Analytic2lsParams:
    P = cfg.params.get("P", 0.01)
    gamma = cfg.params.get("gamma", 1.0)
    if cfg.axis == "pump":
        P = value
    return Analytic2lsParams(P=P, gamma=gamma, Gamma=Gamma)


def _p01(G: list[float], flags: set) -> tuple[float, float]:
    try:
        p0, ok0 = pn_with_flag(G, 0)
        p1, ok1 = pn_with_flag(G, 1)
        if not (ok0 and ok1):
            flags.add("PN_TRUNC")
        return p0, p1
    except NonConvergentSeriesError:
        flags.add("PN_DIVERG")
        return math.nan, math.nan


def sweep_point(cfg: ScenarioConfig, value: float) -> list:
    """One sweep row: [axis, g2.., norms.., population, p0, p1, flags]."""
    N = cfg.norm_order
    flags: set = set()
    try:
        if cfg.method == "analytic":
            Gamma, _ = _point_filter(cfg, value)
            params = _analytic_params(cfg, value, Gamma)
            pop = filtered_population_closed(params)
            gs = [gn_recursion(params, k) for k in range(2, N + 2)]
            ladder_gs = [gn_recursion(params, k) for k in range(2, ANALYTIC_LADDER_DEPTH + 1)]
        elif cfg.filtered:
            preset = _point_preset(cfg, value)
            Gamma, omega = _point_filter(cfg, value)
            pop = filtered_population(
                preset, cfg.emission, Gamma, omega, epsilon=cfg.epsilon, max_dim=cfg.max_dim
            )
            fcs = [
                filtered_gk(
                    preset, cfg.emission, k, Gamma, omega,
                    epsilon=cfg.epsilon, max_dim=cfg.max_dim,
                )
                for k in range(2, N + 2)
            ]
            if not all(fc.converged for fc in fcs):
                flags.add("EPS_NONCONV")
            gs = [fc.value for fc in fcs]
            ladder_gs = gs
        else:
            preset = _point_preset(cfg, value)
            rho = steady_state(build_liouvillian(preset.model))
            mode = preset.emission(cfg.emission)
            pop = float(expectation(rho, mode.dagger() @ mode).real)
            gs = [unfiltered_gk(rho, mode, k) for k in range(2, N + 2)]
            ladder_gs = gs
        norms = [n_norm(gs, M) for M in range(1, N + 1)]
        G = unnormalized_ladder(CorrelatorLadder(pop, tuple(ladder_gs)))
        p0, p1 = _p01(G, flags)
        return [value, *gs, *norms, pop, p0, p1, _flags_str(flags)]
    except Exception as exc:  # per-point failures stay in-row
        nan = math.nan
        return [value, *([nan] * (2 * N + 3)), f"ERROR:{type(exc).__name__}"]


def map_point(cfg: ScenarioConfig, value: float, filt: float) -> list:
    """One map row: [axis, filter, p0, p1, flags]."""
    flags: set = set()
    try:
        if cfg.method == "analytic":
            params = _analytic_params(cfg, value, 1.0)
            Gamma = filt * params.Gamma_sigma if cfg.map_units == "gamma_sigma" else filt
            params = Analytic2lsParams(params.P, params.gamma, Gamma)
            p0 = pn_closed_form(params, 0)
            p1 = pn_closed_form(params, 1)
        else:
            preset = _point_preset(cfg, value)
            Gamma = filt
            pop = filtered_population(
                preset, cfg.emission, Gamma, cfg.omega_f,
                epsilon=cfg.epsilon, max_dim=cfg.max_dim,
            )
            fcs = [
                filtered_gk(
                    preset, cfg.emission, k, Gamma, cfg.omega_f,
                    epsilon=cfg.epsilon, max_dim=cfg.max_dim,
                )
                for k in range(2, cfg.ladder_depth + 1)
            ]
            if not all(fc.converged for fc in fcs):
                flags.add("EPS_NONCONV")
            G = unnormalized_ladder(CorrelatorLadder(pop, tuple(f.value for f in fcs)))
            p0, p1 = _p01(G, flags)
        return [value, filt, p0, p1, _flags_str(flags)]
    except Exception as exc:
        return [value, filt, math.nan, math.nan, f"ERROR:{type(exc).__name__}"]


def _sweep_columns(N: int) -> list[str]:
    return (
        ["axis"]
        + [f"g{k}" for k in range(2, N + 2)]
        + [f"norm{m}" for m in range(1, N + 1)]
        + ["population", "p0", "p1", "flags"]
    )


def _scenario_comments(cfg: ScenarioConfig) -> list[str]:
    lines = [
        f"sps-norm {__version__}",
        f"scenario: {cfg.name}",
        f"preset: {cfg.preset}",
        f"kind: {cfg.kind}",
        f"method: {cfg.method}",
        f"axis: {cfg.axis}",
        f"grid: {cfg.grid.lo:.17e} {cfg.grid.hi:.17e} {cfg.grid.points} {cfg.grid.scale}",
    ]
    if cfg.kind == "map":
        lines.append(
            f"map-axis: {cfg.map_axis} ({cfg.map_units} units)"
        )
        lines.append(
            f"map-grid: {cfg.map_grid.lo:.17e} {cfg.map_grid.hi:.17e} "
            f"{cfg.map_grid.points} {cfg.map_grid.scale}"
        )
        lines.append(f"ladder-depth: {cfg.ladder_depth}")
    else:
        lines.append(f"norm-order: {cfg.norm_order}")
        lines.append(f"filtered: {str(cfg.filtered).lower()}")
    if cfg.Gamma is not None:
        lines.append(f"Gamma: {cfg.Gamma:.17e}")
    lines.append(f"omega_f: {cfg.omega_f:.17e}")
    if cfg.emission is not None:
        lines.append(f"emission: {cfg.emission}")
    if cfg.params:
        pairs = ",".join(f"{k}={cfg.params[k]!r}" for k in sorted(cfg.params))
        lines.append(f"parameters: {pairs}")
    lines.append(
        f"tolerances: epsilon={cfg.epsilon!r} residual={cfg.residual_tol!r} "
        f"truncation={cfg.truncation_tol!r}"
    )
    return lines


def _needs_truncation_check(cfg: ScenarioConfig) -> bool:
    return (
        cfg.check_truncation
        and cfg.kind == "sweep"
        and cfg.preset in ("blockade-conventional", "blockade-unconventional", "2ls-cavity")
    )


def _truncation_precheck(cfg: ScenarioConfig, grid: np.ndarray):
    """Verify the bosonic cap once per scenario, at the grid extremes.

    Unfiltered sweeps use the plain cap-bump certificate. Filtered sweeps
    bump the cap under the sensor readout instead: the sector solve keeps
    widely separated magnitudes in separate blocks, so the comparison is
    meaningful even where the bare steady state buries high-Fock weights
    below solver noise.
    """
    order = cfg.norm_order + 1
    if cfg.axis in EMITTER_AXES and len(grid) > 1:
        points = (grid[0], grid[-1])
    else:
        points = (grid[-1],)  # widest filter admits the most statistics
    for value in points:
        preset = _point_preset(cfg, float(value))
        emission = cfg.emission or preset.default_emission
        if not cfg.filtered:
            verify_truncation(preset, emission, order)
            continue
        Gamma, omega = _point_filter(cfg, float(value))
        ref = filtered_gk(
            preset, emission, order, Gamma, omega,
            epsilon=cfg.epsilon, max_dim=cfg.max_dim,
        ).value
        wide = filtered_gk(
            bumped_preset(preset), emission, order, Gamma, omega,
            epsilon=cfg.epsilon, max_dim=cfg.max_dim,
        ).value
        gap = abs(wide - ref) / max(abs(wide), 1e-300)
        if gap >= FILTERED_TRUNCATION_RTOL:
            raise TruncationError(
                f"{preset.name}: filtered g^({order}) moves by {gap:.2e} when "
                "the cap grows; raise the bosonic cap",
                suggested=preset.parameters["n_max"] + 2,
            )


def run_scenario(cfg: ScenarioConfig, jobs: int = 1) -> ResultTable:
    """Execute one scenario; per-point failures are flagged, not fatal."""
    grid = cfg.grid.values()
    if _needs_truncation_check(cfg):
        _truncation_precheck(cfg, grid)
    if cfg.kind == "sweep":
        tasks = [(float(v),) for v in grid]
        worker = sweep_point
        columns = _sweep_columns(cfg.norm_order)
    else:
        filters = cfg.map_grid.values()
        tasks = [(float(v), float(f)) for v in grid for f in filters]
        worker = map_point
        columns = ["axis", "filter", "p0", "p1", "flags"]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_pool_entry, [(cfg, worker.__name__, t) for t in tasks]))
    else:
        rows = [worker(cfg, *t) for t in tasks]
    errors = sum(1 for r in rows if str(r[-1]).startswith("ERROR:"))
    return ResultTable(
        scenario=cfg,
        columns=columns,
        rows=rows,
        comments=_scenario_comments(cfg),
        error_count=errors,
    )


def _pool_entry(packed):
    cfg, worker_name, task = packed
    fn = sweep_point if worker_name == "sweep_point" else map_point
    return fn(cfg, *task)


def _format_cell(v) -> str:
    if isinstance(v, str):
        return v
    return f"{float(v):.17e}"


def emit_csv(table: ResultTable, path) -> None:
    if not table.rows:
        raise ValidationError("refusing to write an empty table")
    lines = [f"# {c}" for c in table.comments]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
