"""Command-line front end: run scenarios, fit coefficient tables, emit presets.

Exit codes are stable contracts: 0 on success, 1 on usage/config/fit errors,
2 when a run terminates in a controlled abort (singular reference direction,
antipodal attitude, or non-finite state).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import aero, config, sim
from .errors import ContractViolation, DegenerateFit

TRACE_HEADER = (
    "t,vr1,vr2,vr3,v1,v2,v3,alpha_deg,w1,w2,w3,"
    "T_over_mg,Fbar_over_mg,theta_tilde_deg,V1"
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ABORT = 2


def write_trace_csv(path, trace) -> None:
    """Trace rows to CSV; 12 significant digits so a reload is lossless."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TRACE_HEADER + "\n")
        for r in trace:
            vals = (
                r.t, *r.vr, *r.v, r.alpha_deg, *r.omega,
                r.T_over_mg, r.f_over_mg, r.theta_tilde_deg, r.V1,
            )
            fh.write(",".join(f"{x:.12g}" for x in vals) + "\n")


def read_trace_csv(path) -> np.ndarray:
    """Load an emitted trace as a (n, 15) float array, validating the header."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TRACE_HEADER:
            raise ContractViolation(f"{path}: unexpected trace header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != 15:
        raise ContractViolation(f"{path}: expected 15 columns, got {data.shape[1]}")
    if data.shape[0] > 1 and np.any(np.diff(data[:, 0]) <= 0.0):
        raise ContractViolation(f"{path}: time column must be strictly increasing")
    return data


def summary_text(loaded: config.LoadedScenario, result: sim.RunResult) -> str:
    """Human-readable run report ending in a machine-readable block."""
    lines = ["run summary", "===========", ""]
    lines.append("effective configuration:")
    for section, keys in loaded.effective.items():
        lines.append(f"  [{section}]")
        for key, value in keys.items():
            mark = "  (default)" if f"{section}.{key}" in loaded.filled_defaults else ""
            lines.append(f"    {key} = {value}{mark}")
    lines.append("")
    mon = result.monitors
    term = result.termination
    lines.append(f"termination: {term.kind} at t = {term.t:.6g} s")
    lines.append(f"rows logged: {len(result.trace)}")
    lines.append(f"min apparent force / mg: {mon.min_f_over_mg:.6g}")
    ly = mon.lyapunov
    lines.append(
        "alignment decay: "
        f"{ly.violations}/{ly.checked} violations (worst ratio {ly.worst_ratio:.4g}), "
        f"excluded {ly.excluded_saturated} saturated / {ly.excluded_jump} jump / "
        f"{ly.excluded_floor} floor intervals, k1_min = {ly.k1_min:.4g}"
    )
    lines.append(
        f"perturbation bound: {'OK' if ly.eps_bound_ok else 'VIOLATED'} "
        f"(worst {ly.eps_bound_worst:.6g})"
    )
    lines.append("segments:")
    for s in mon.segments:
        extra = " [truncated]" if s.truncated else ""
        lines.append(
            f"  {s.kind:9s} [{s.t0:5.1f},{s.t1:5.1f}) s: terminal |v err| = "
            f"{s.terminal_mean_mach:.6g} Mach, last-half max = {s.last_half_max_mach:.6g}, "
            f"decayed = {s.decayed}{extra}"
        )
    lines.append("")
    lines.append("[result]")
    lines.append(f"termination={term.kind}")
    lines.append(f"t_abort={'' if term.completed else format(term.t, '.6g')}")
    lines.append(f"min_Fbar_over_mg={mon.min_f_over_mg:.6g}")
    lines.append(f"eps_bound_ok={str(ly.eps_bound_ok).lower()}")
    lines.append(f"rows={len(result.trace)}")
    return "\n".join(lines) + "\n"


def fit_report_text(report: aero.FitReport) -> str:
    lines = [
        "coefficient fit report",
        "======================",
        f"samples:            {report.n_samples}",
        f"c0:                 {report.c0:.10g}",
        f"c1:                 {report.c1:.10g}",
        f"cd0 (= c0 + 2 c1):  {report.c0 + 2.0 * report.c1:.10g}",
        f"rms residual cd:    {report.rms_cd:.6g}",
        f"rms residual cl:    {report.rms_cl:.6g}",
        f"raw-table constant-sum residual: {report.compat_residual:.6g}",
        "",
        "# scenario fragment",
        "[estimates]",
        f"c0 = {report.c0:.10g}",
        f"c1 = {report.c1:.10g}",
        "",
    ]
    return "\n".join(lines)


def cmd_run(args) -> int:
    try:
        loaded = config.load_scenario(args.scenario)
    except (OSError, config.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    scenario = loaded.scenario
    overrides = {}
    if args.controller:
        overrides["controller_mode"] = args.controller
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.decimation is not None:
        overrides["decimation"] = args.decimation
    if overrides:
        try:
            from dataclasses import replace

            scenario = replace(scenario, **overrides)
        except ContractViolation as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE

    result = sim.run(scenario)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace_csv(out, result.trace)
    report = summary_text(loaded, result)
    summary_path = out.with_suffix(".summary.txt")
    summary_path.write_text(report, encoding="utf-8")
    print(report, end="")
    print(f"trace:   {out}")
    print(f"summary: {summary_path}")
    return EXIT_OK if result.termination.completed else EXIT_ABORT


def cmd_fit(args) -> int:
    try:
        alpha_deg, cl, cd = aero.load_coeff_table_csv(args.table)
        model, report = aero.fit_trig_model(np.radians(alpha_deg), cl, cd)
    except (OSError, ContractViolation, DegenerateFit) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = fit_report_text(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"report: {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_preset(args) -> int:
    table_csv = ""
    try:
        if args.emit_table:
            if not args.out:
                print("error: --emit-table requires --out", file=sys.stderr)
                return EXIT_USAGE
            table_path = Path(args.out).with_suffix(".table.csv")
            table_path.parent.mkdir(parents=True, exist_ok=True)
            table_path.write_text(config.measured_table_text(), encoding="utf-8")
            table_csv = str(table_path)
        sections = config.preset_sections(
            args.name,
            computed_ka=args.computed_ka,
            trig_truth=args.trig_truth,
            table_csv=table_csv,
        )
    except config.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = config.render_ini(sections, header=f"preset: {args.name}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"scenario: {args.out}")
        if table_csv:
            print(f"table:    {table_csv}")
    else:
        print(text, end="")
    return EXIT_OK


def _schema_epilog() -> str:
    lines = ["scenario file schema (all keys optional; defaults shown):", ""]
    for section, keys in config.SCHEMA.items():
        lines.append(f"  [{section}]")
        for key, (default, comment) in keys.items():
            lines.append(f"    {key} = {default:<22} # {comment}")
        lines.append("")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axiflight",
        description="Thrust-direction flight control simulator for axisymmetric vehicles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser(
        "run",
        help="simulate a scenario file, write trace CSV and summary",
        epilog=_schema_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_run.add_argument("scenario", help="scenario file path")
    p_run.add_argument("--controller", choices=("fp", "fa"), help="override controller mode")
    p_run.add_argument("--dt", type=float, help="override integration step [s]")
    p_run.add_argument("--decimation", type=int, help="override log decimation")
    p_run.add_argument("--out", default="trace.csv", help="trace CSV path")
    p_run.set_defaults(func=cmd_run)

    p_fit = sub.add_parser("fit", help="fit the two-parameter model to a coefficient table")
    p_fit.add_argument("table", help="CSV with header alpha_deg,cl,cd")
    p_fit.add_argument("--out", help="write the report here instead of stdout")
    p_fit.set_defaults(func=cmd_fit)

    p_pre = sub.add_parser("preset", help="emit a ready-made scenario file")
    p_pre.add_argument("name", choices=config.PRESET_NAMES)
    p_pre.add_argument("--out", help="write the scenario here instead of stdout")
    p_pre.add_argument(
        "--computed-ka",
        action="store_true",
        help="use rho*area/2 = 0.323 instead of the rounded 0.3",
    )
    p_pre.add_argument(
        "--trig-truth",
        action="store_true",
        help="fly the exact trig-model plant instead of the synthetic measured table",
    )
    p_pre.add_argument(
        "--emit-table",
        action="store_true",
        help="write the measured table as CSV and load it through the file interface",
    )
    p_pre.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
