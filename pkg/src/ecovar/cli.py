"""Command-line entry points: ``ecovar simulate | run | plot``.

Exit codes: 0 full success, 1 config or I/O error, 2 when one or more study
variants failed (the report is still written).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, EcovarError
from .report import load_irf_table, render_irf_svg, write_report
from .simulate import simulate_study_data, write_study_data
from .study import load_config, run_study


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg.simulate is None:
        raise ConfigError("config has no 'simulate' block, nothing to generate")
    files = simulate_study_data(cfg.simulate, cfg.simulate_n_days, cfg.seed,
                                start=cfg.simulate_start)
    write_study_data(files, args.out)
    print(f"wrote {len(files)} files to {args.out}")
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    report = run_study(cfg, args.data)
    write_report(report, args.out)
    failed = [v.name for v in report.variants if v.error is not None]
    ok = len(report.variants) - len(failed)
    print(f"{ok}/{len(report.variants)} variants completed; report in {args.out}")
    for name in failed:
        print(f"variant {name} failed: {report.variant(name).error}", file=sys.stderr)
    return 2 if failed else 0


def _cmd_plot(args) -> int:
    table_path = Path(args.report) / "tables" / f"irf_{args.variant}.csv"
    if not table_path.is_file():
        raise ConfigError(f"no IRF table for variant {args.variant!r} at {table_path}")
    data = load_irf_table(table_path)
    names = data["var_names"]
    for label, value in (("impulse", args.impulse), ("response", args.response)):
        if value not in names:
            raise ConfigError(f"unknown {label} {value!r}; variables are {names}")
    i, j = names.index(args.response), names.index(args.impulse)
    svg = render_irf_svg(data["theta"][:, i, j], data["lower"][:, i, j],
                         data["upper"][:, i, j], args.impulse, args.response)
    out = Path(args.out) if args.out else (
        Path(args.report) / "plots" / f"{args.variant}_{args.response}_from_{args.impulse}.svg"
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg, newline="")
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecovar",
        description="GARCH volatility extraction, VAR estimation, and impulse-response "
                    "studies on daily data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset from the "
                                            "config's simulate block")
    p_sim.add_argument("--config", required=True, help="study config JSON")
    p_sim.add_argument("--out", required=True, help="directory for the CSV files")
    p_sim.set_defaults(func=_cmd_simulate)

    p_run = sub.add_parser("run", help="run the configured study on a data directory")
    p_run.add_argument("--config", required=True, help="study config JSON")
    p_run.add_argument("--data", required=True, help="directory holding the CSV inputs")
    p_run.add_argument("--out", required=True, help="directory for report, tables, plots")
    p_run.set_defaults(func=_cmd_run)

    p_plot = sub.add_parser("plot", help="render one impulse-response panel from a report")
    p_plot.add_argument("--report", required=True, help="report directory from 'run'")
    p_plot.add_argument("--impulse", required=True, help="shocked variable name")
    p_plot.add_argument("--response", required=True, help="responding variable name")
    p_plot.add_argument("--variant", default="base", help="variant whose IRF to plot")
    p_plot.add_argument("--out", default=None, help="output SVG path")
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EcovarError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
