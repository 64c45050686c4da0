"""Command line front end.

`sps-norm run config.cfg` executes every scenario in the file and writes
one CSV per scenario. `sps-norm preset fig2a` does the same for a bundled
config; `sps-norm preset coherent-2ls` prints an editable template.
`sps-norm validate config.cfg` checks a file without solving anything.

Exit codes: 0 all points computed, 2 some points or scenarios failed
(results for the rest are still written), 1 config or IO trouble.
"""
from __future__ import annotations

import argparse
import dataclasses
import inspect
import sys
from importlib import resources
from pathlib import Path

from .errors import ParseError, ValidationError
from .models import PRESET_AXES, _BUILDERS, build_preset, polariton_blockade, preset_names
from .runner import emit_csv, parse_config, run_scenario

FIGURE_BUNDLES = ("fig1", "fig2a", "fig2b")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sps-norm",
        description="N-norm single-photon-source benchmarks from filtered photon correlations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def _worker_flags(p):
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        p.add_argument("--epsilon", type=float, default=None,
                       help="override the sensor coupling for every scenario")
        p.add_argument("--max-dim", type=int, default=None,
                       help="raise the composite Hilbert-space cap")

    run_p = sub.add_parser("run", help="execute every scenario in a config file")
    run_p.add_argument("config", type=Path)
    _worker_flags(run_p)

    pre_p = sub.add_parser(
        "preset",
        help="run a bundled figure config, or print an emitter template",
    )
    pre_p.add_argument("name", help=f"{', '.join(FIGURE_BUNDLES)} or an emitter preset name")
    _worker_flags(pre_p)

    val_p = sub.add_parser("validate", help="check a config file without running it")
    val_p.add_argument("config", type=Path)
    return parser


def _load_scenarios(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None
    try:
        return parse_config(text)
    except ParseError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None


def _run_file(path: Path, out_dir: Path, jobs: int, epsilon, max_dim) -> int:
    scenarios = _load_scenarios(path)
    if scenarios is None:
        return 1
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out_dir}: {exc}", file=sys.stderr)
        return 1
    partial = False
    for cfg in scenarios:
        if epsilon is not None:
            cfg = dataclasses.replace(cfg, epsilon=epsilon)
        if max_dim is not None:
            cfg = dataclasses.replace(cfg, max_dim=max_dim)
        try:
            table = run_scenario(cfg, jobs=jobs)
        except Exception as exc:  # scenario-level failure; keep going
            print(f"{cfg.name}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
            partial = True
            continue
        dest = out_dir / cfg.out
        try:
            emit_csv(table, dest)
        except OSError as exc:
            print(f"error: cannot write {dest}: {exc}", file=sys.stderr)
            return 1
        note = "ok" if table.error_count == 0 else f"{table.error_count} failed point(s)"
        print(f"{cfg.name}: {len(table.rows)} rows -> {dest} ({note})")
        if table.error_count:
            partial = True
    return 2 if partial else 0


def _validate_file(path: Path) -> int:
    scenarios = _load_scenarios(path)
    if scenarios is None:
        return 1
    for cfg in scenarios:
        # structural checks happened in the parser; here we make sure the
        # preset actually accepts the overrides and offers the emission mode
        try:
            preset = build_preset(cfg.preset, cfg.params)
            preset.emission(cfg.emission)
        except ValidationError as exc:
            print(f"error: scenario [{cfg.name}]: {exc}", file=sys.stderr)
            return 1
        print(f"{cfg.name}: {cfg.kind} of {cfg.preset} -> {cfg.out}")
    print(f"ok: {len(scenarios)} scenario(s)")
    return 0


def _template(name: str) -> str:
    target = polariton_blockade if name.startswith("blockade") else _BUILDERS[name]
    axes = PRESET_AXES.get(name, {})
    lines = [
        f"[{name}-norms]",
        f"preset = {name}",
        "kind = sweep",
        "method = sensor",
        "axis = filter_linewidth",
        "grid = 0.1 100 13 log",
        "norm_order = 3",
        "filtered = true",
        "omega_f = 0.0",
        f"out = {name}-norms.csv",
    ]
    if axes:
        named = ", ".join(f"{axis} (param.{axes[axis]})" for axis in sorted(axes))
        lines.append(f"# other sweep axes: {named}, sensor_frequency")
    if name == "incoherent-2ls":
        lines.append("# method = analytic uses the closed-form route for this preset")
    lines.append("# parameter defaults, uncomment to override:")
    for pname, param in inspect.signature(target).parameters.items():
        if pname == "verify_order" or param.default is inspect.Parameter.empty:
            continue
        if param.default is None:
            continue
        value = 0.0 if name == "blockade-conventional" and pname == "g" else param.default
        lines.append(f"# param.{pname} = {value!r}")
    return "\n".join(lines) + "\n"


def _preset_cmd(name: str, out_dir: Path, jobs: int, epsilon, max_dim) -> int:
    if name in FIGURE_BUNDLES:
        ref = resources.files("sps_norm.presets") / f"{name}.cfg"
        with resources.as_file(ref) as bundled:
            return _run_file(Path(bundled), out_dir, jobs, epsilon, max_dim)
    if name in preset_names():
        sys.stdout.write(_template(name))
        return 0
    options = ", ".join(list(FIGURE_BUNDLES) + preset_names())
    print(f"error: unknown preset {name!r}; options: {options}", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _run_file(args.config, args.out, args.jobs, args.epsilon, args.max_dim)
    if args.command == "preset":
        return _preset_cmd(args.name, args.out, args.jobs, args.epsilon, args.max_dim)
    return _validate_file(args.config)


if __name__ == "__main__":
    raise SystemExit(main())
