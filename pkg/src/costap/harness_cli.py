"""Scenario files, experiment orchestration and machine-readable output.

Scenario schema (JSON, angles in radians):

    {"dims": {"M": 5, "N": 8, "L": 8},
     "target": {"azimuth": 0.0, "elevation": 1.047, "doppler": -0.1443},
     "kappa": 1.0, "power": 1.0,
     "noise": {"decay": 0.005},
     "interferers": [{"azimuth": 0.39, "elevation": 1.047,
                      "phase_rate": 0.02, "power": 1.0}],
     "clutter": {"patches": 25, "elevation": 0.3,
                 "azimuth_span": [-1.5708, 1.5708],
                 "patch_power": 1.0, "doppler_slope": 1.0},
     "seed": 1729}

Unspecified fields take the defaults shown by scenario_from_dict. Trace
CSV columns are fixed: iter, objective, clutter_objective, power,
capon_residual, multiplier, step_w, step_s, drift, rescaled_objective
(the last one empty when not rescaling). Floats are printed with 17
significant digits so emitted files are bit-reproducible and parse back
to identical values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .am_driver import SOLVERS, IterateTrace, RunReport, draw_waveform, run
from .errors import CostapError, ParseError, ValidationError
from .radar_model import ClutterSpec, InterfererSpec, ScenarioConfig, TargetSpec

TRACE_COLUMNS = (
    "iter", "objective", "clutter_objective", "power", "capon_residual",
    "multiplier", "step_w", "step_s", "drift", "rescaled_objective",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """One comparison experiment: which solvers, how many trials."""

    scenario: ScenarioConfig
    solvers: tuple[str, ...]
    lambda_mode: str = "root"
    rescale: bool = False
    trials: int = 1
    max_iter: int = 20
    seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials", f"must be >= 1, got {self.trials}")
        if not self.solvers:
            raise ValidationError("solvers", "must be nonempty")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValidationError("solvers", f"unknown solver {s!r}")
        if self.max_iter < 0:
            raise ValidationError("max_iter", f"must be >= 0, got {self.max_iter}")
        if self.lambda_mode not in ("root", "zero"):
            raise ValidationError("lambda_mode", f"must be 'root' or 'zero', got {self.lambda_mode!r}")


@dataclass(frozen=True)
class TableRow:
    algorithm: str
    mean_final_objective: float
    std_final_objective: float
    trials: int


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[TableRow, ...]
    failures: tuple[tuple[str, int, str], ...] = ()


def default_scenario_path() -> Path:
    """Location of the bundled demo scenario file."""
    return Path(str(resources.files("costap").joinpath("data/scenario_default.json")))


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate a scenario JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read scenario file {path}: {exc}") from exc
    if not text.strip():
        raise ParseError(f"scenario file {path} is empty")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"scenario file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a JSON object")
    return scenario_from_dict(doc)


def _get_num(doc: dict, key: str, default, label: str) -> float:
    value = doc.get(key, default)
    if value is None:
        raise ValidationError(label, "is required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(label, f"must be a number, got {value!r}")
    return float(value)


def _get_int(doc: dict, key: str, default, label: str) -> int:
    value = doc.get(key, default)
    if value is None:
        raise ValidationError(label, "is required")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(label, f"must be an integer, got {value!r}")
    return value


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig; absent fields take defaults."""
    dims = doc.get("dims")
    if not isinstance(dims, dict):
        raise ValidationError("dims", "must be an object with M, N, L")
    target_doc = doc.get("target")
    if not isinstance(target_doc, dict):
        raise ValidationError("target", "must be an object with azimuth, elevation, doppler")
    target = TargetSpec(
        azimuth=_get_num(target_doc, "azimuth", None, "target.azimuth"),
        elevation=_get_num(target_doc, "elevation", None, "target.elevation"),
        doppler=_get_num(target_doc, "doppler", None, "target.doppler"),
    )
    noise = doc.get("noise", {})
    if not isinstance(noise, dict):
        raise ValidationError("noise", "must be an object")
    interferers = []
    for i, itf in enumerate(doc.get("interferers", [])):
        if not isinstance(itf, dict):
            raise ValidationError(f"interferers[{i}]", "must be an object")
        interferers.append(InterfererSpec(
            azimuth=_get_num(itf, "azimuth", None, f"interferers[{i}].azimuth"),
            elevation=_get_num(itf, "elevation", None, f"interferers[{i}].elevation"),
            phase_rate=_get_num(itf, "phase_rate", None, f"interferers[{i}].phase_rate"),
            power=_get_num(itf, "power", 1.0, f"interferers[{i}].power"),
        ))
    clutter_doc = doc.get("clutter", {})
    if not isinstance(clutter_doc, dict):
        raise ValidationError("clutter", "must be an object")
    span = clutter_doc.get("azimuth_span", (0.0, 0.0))
    if not isinstance(span, (list, tuple)) or len(span) != 2:
        raise ValidationError("clutter.azimuth_span", f"must be [lo, hi], got {span!r}")
    clutter = ClutterSpec(
        patches=_get_int(clutter_doc, "patches", 1, "clutter.patches"),
        elevation=_get_num(clutter_doc, "elevation", 0.0, "clutter.elevation"),
        azimuth_span=(float(span[0]), float(span[1])),
        patch_power=_get_num(clutter_doc, "patch_power", 1.0, "clutter.patch_power"),
        doppler_slope=_get_num(clutter_doc, "doppler_slope", 1.0, "clutter.doppler_slope"),
    )
    return ScenarioConfig(
        M=_get_int(dims, "M", None, "dims.M"),
        N=_get_int(dims, "N", None, "dims.N"),
        L=_get_int(dims, "L", None, "dims.L"),
        target=target,
        kappa=_get_num(doc, "kappa", 1.0, "kappa"),
        power=_get_num(doc, "power", 1.0, "power"),
        noise_decay=_get_num(noise, "decay", 0.005, "noise.decay"),
        interferers=tuple(interferers),
        clutter=clutter,
        seed=_get_int(doc, "seed", 0, "seed"),
    )


def _splitmix64(seed: int, index: int) -> int:
    """Independent per-trial seed stream (splitmix64 finalizer)."""
    mask = (1 << 64) - 1
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return (z ^ (z >> 31)) & mask


def _trial_waveform(cfg: ScenarioConfig, seed: int, trial: int) -> np.ndarray:
    return draw_waveform(cfg.N, cfg.power, np.random.default_rng(_splitmix64(seed, trial)))


def _label(solver: str, lambda_mode: str, rescaled: bool) -> str:
    base = f"{solver}[{lambda_mode}]"
    return base + "+rescaled" if rescaled else base


def run_comparison(spec: ExperimentSpec):
    """Run every requested solver from one shared start per trial.

    Returns (traces, table): traces maps solver name to the per-trial
    trace list (None for failed cells); the table has one row per
    solver, plus a rescaled row per solver when spec.rescale is set.
    Failures are recorded per (solver, trial) without aborting the rest.
    """
    cfg = spec.scenario
    traces: dict[str, list[IterateTrace | None]] = {s: [] for s in spec.solvers}
    failures: list[tuple[str, int, str]] = []
    for trial in range(spec.trials):
        s0 = _trial_waveform(cfg, spec.seed, trial)
        for solver in spec.solvers:
            try:
                report: RunReport = run(
                    cfg, solver, max_iter=spec.max_iter,
                    lambda_mode=spec.lambda_mode, rescale=spec.rescale,
                    init_waveform=s0,
                )
                traces[solver].append(report.trace)
            except CostapError as exc:
                traces[solver].append(None)
                failures.append((solver, trial, str(exc)))

    rows: list[TableRow] = []
    for solver in spec.solvers:
        finals = [t.records[-1].full_objective for t in traces[solver] if t is not None]
        rows.append(_table_row(_label(solver, spec.lambda_mode, False), finals))
        if spec.rescale:
            rescaled = [t.records[-1].rescaled_objective for t in traces[solver]
                        if t is not None and t.records[-1].rescaled_objective is not None]
            rows.append(_table_row(_label(solver, spec.lambda_mode, True), rescaled))
    return traces, ComparisonTable(rows=tuple(rows), failures=tuple(failures))


def _table_row(label: str, finals: list[float]) -> TableRow:
    arr = np.asarray(finals, dtype=float)
    if arr.size == 0:
        return TableRow(label, float("nan"), float("nan"), 0)
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return TableRow(label, float(np.mean(arr)), std, int(arr.size))


def _fmt(value) -> str:
    """17-significant-digit float token (round-trips float64 exactly)."""
    if value is None:
        return ""
    return f"{float(value):.17g}"


def _json_num(value) -> str:
    if value is None:
        return "null"
    value = float(value)
    if np.isnan(value):
        return "NaN"
    if np.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return f"{value:.17g}"


def emit_trace(trace: IterateTrace, path, fmt: str = "csv") -> None:
    """Write a per-iteration trace as CSV or JSON (see module docstring)."""
    path = Path(path)
    if fmt == "csv":
        lines = [",".join(TRACE_COLUMNS)]
        for r in trace.records:
            lines.append(",".join([
                str(r.iteration),
                _fmt(r.full_objective),
                _fmt(r.clutter_objective),
                _fmt(r.power),
                _fmt(r.capon_residual),
                _fmt(r.multiplier),
                _fmt(r.step_w),
                _fmt(r.step_s),
                _fmt(r.drift),
                _fmt(r.rescaled_objective),
            ]))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        rec_objs = []
        for r in trace.records:
            fields = [f'"iter": {r.iteration}']
            for name, value in (
                ("objective", r.full_objective),
                ("clutter_objective", r.clutter_objective),
                ("power", r.power),
                ("capon_residual", r.capon_residual),
                ("multiplier", r.multiplier),
                ("step_w", r.step_w),
                ("step_s", r.step_s),
                ("drift", r.drift),
                ("rescaled_objective", r.rescaled_objective),
            ):
                fields.append(f'"{name}": {_json_num(value)}')
            rec_objs.append("    {" + ", ".join(fields) + "}")
        head = (
            f'  "solver": {json.dumps(trace.solver)},\n'
            f'  "lambda_mode": {json.dumps(trace.lambda_mode)},\n'
            f'  "rescaled": {json.dumps(trace.rescaled)},\n'
            f'  "seed": {json.dumps(trace.seed)},\n'
        )
        body = '  "records": [\n' + ",\n".join(rec_objs) + "\n  ]\n"
        path.write_text("{\n" + head + body + "}\n")
    else:
        raise ValueError(f"unknown trace format {fmt!r}")


def read_trace(path, fmt: str = "csv"):
    """Parse an emitted trace back into (metadata, rows of floats/None)."""
    path = Path(path)
    if fmt == "csv":
        lines = path.read_text().splitlines()
        header = lines[0].split(",")
        if tuple(header) != TRACE_COLUMNS:
            raise ParseError(f"unexpected trace header {header!r}")
        rows = []
        for line in lines[1:]:
            cells = line.split(",")
            row = {"iter": int(cells[0])}
            for name, cell in zip(TRACE_COLUMNS[1:], cells[1:]):
                row[name] = None if cell == "" else float(cell)
            rows.append(row)
        return {}, rows
    if fmt == "json":
        doc = json.loads(path.read_text())
        meta = {k: doc[k] for k in ("solver", "lambda_mode", "rescaled", "seed")}
        return meta, doc["records"]
    raise ValueError(f"unknown trace format {fmt!r}")


def emit_table(table: ComparisonTable, path, fmt: str = "csv") -> None:
    """Write a comparison table as CSV or JSON."""
    path = Path(path)
    if fmt == "csv":
        lines = ["algorithm,mean_final_objective,std_final_objective,trials"]
        for row in table.rows:
            lines.append(",".join([
                row.algorithm,
                _fmt(row.mean_final_objective),
                _fmt(row.std_final_objective),
                str(row.trials),
            ]))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        items = []
        for row in table.rows:
            items.append(
                "    {" + ", ".join([
                    f'"algorithm": {json.dumps(row.algorithm)}',
                    f'"mean_final_objective": {_fmt(row.mean_final_objective)}',
                    f'"std_final_objective": {_fmt(row.std_final_objective)}',
                    f'"trials": {row.trials}',
                ]) + "}"
            )
        path.write_text('{\n  "rows": [\n' + ",\n".join(items) + "\n  ]\n}\n")
    else:
        raise ValueError(f"unknown table format {fmt!r}")


def _print_table(table: ComparisonTable) -> None:
    width = max([len(r.algorithm) for r in table.rows] + [9])
    print(f"{'algorithm':<{width}}  {'mean_final':>14}  {'std':>12}  trials")
    for r in table.rows:
        print(f"{r.algorithm:<{width}}  {r.mean_final_objective:>14.6e}  "
              f"{r.std_final_objective:>12.4e}  {r.trials:>6}")
    for solver, trial, message in table.failures:
        print(f"FAILED {solver} trial {trial}: {message}", file=sys.stderr)


def _load_cfg(args) -> ScenarioConfig:
    path = args.scenario if args.scenario else default_scenario_path()
    cfg = load_scenario(path)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load_cfg(args)
    report = run(cfg, args.solver, max_iter=args.iters,
                 lambda_mode=args.lambda_mode, rescale=args.rescale)
    last = report.trace.records[-1]
    print(f"solver={args.solver} iterations={last.iteration} "
          f"final_objective={last.full_objective:.12e} power={last.power:.6f} "
          f"monotonicity_violations={report.monotonicity_violations}")
    if args.out:
        emit_trace(report.trace, args.out, args.format)
        print(f"trace written to {args.out}")
    return 0


def _run_experiment(args, default_trials: int, write_traces: bool) -> int:
    cfg = _load_cfg(args)
    spec = ExperimentSpec(
        scenario=cfg,
        solvers=tuple(args.solver) if args.solver else SOLVERS,
        lambda_mode=args.lambda_mode,
        rescale=args.rescale,
        trials=args.trials if args.trials is not None else default_trials,
        max_iter=args.iters,
        seed=args.seed if args.seed is not None else cfg.seed,
        output_path=args.out,
    )
    traces, table = run_comparison(spec)
    _print_table(table)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if write_traces:
            for solver, trial_traces in traces.items():
                for t, trace in enumerate(trial_traces):
                    if trace is None:
                        continue
                    name = f"trace_{solver}_trial{t:03d}.{args.format}"
                    emit_trace(trace, out_dir / name, args.format)
        emit_table(table, out_dir / f"comparison.{args.format}", args.format)
        print(f"results written to {out_dir}")
    return 3 if table.failures else 0


def _cmd_compare(args) -> int:
    return _run_experiment(args, default_trials=1, write_traces=True)


def _cmd_montecarlo(args) -> int:
    return _run_experiment(args, default_trials=50, write_traces=False)


def _add_common(p: argparse.ArgumentParser, multi_solver: bool) -> None:
    p.add_argument("--scenario", metavar="PATH", default=None,
                   help="scenario JSON (default: bundled demo scenario)")
    if multi_solver:
        p.add_argument("--solver", action="append", choices=SOLVERS,
                       help="solver(s) to run; repeatable (default: all four)")
    else:
        p.add_argument("--solver", choices=SOLVERS, default="qcqp")
    p.add_argument("--iters", type=int, default=20, metavar="K")
    p.add_argument("--lambda-mode", choices=("root", "zero"), default="root",
                   dest="lambda_mode")
    p.add_argument("--rescale", action="store_true",
                   help="also record the full-power rescaled objective")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario seed")
    p.add_argument("--out", metavar="PATH", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="costap",
        description="Joint receive-filter and waveform co-design experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single solver, single run")
    _add_common(p_run, multi_solver=False)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="all solvers from one shared start")
    _add_common(p_cmp, multi_solver=True)
    p_cmp.add_argument("--trials", type=int, default=None, metavar="T")
    p_cmp.set_defaults(func=_cmd_compare)

    p_mc = sub.add_parser("montecarlo", help="multi-trial mean comparison table")
    _add_common(p_mc, multi_solver=True)
    p_mc.add_argument("--trials", type=int, default=None, metavar="T")
    p_mc.set_defaults(func=_cmd_montecarlo)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CostapError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
