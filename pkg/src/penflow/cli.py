"""Experiment runner CLI.

Commands:
    penflow run <config>                 integrate and persist diagnostics
    penflow twin <config> --perturb e    two runs with perturbed initial data
    penflow check <config>               validate the configuration only
    penflow export <run-dir>             tidy per-diagnostic CSV files

Exit status: 0 clean, 1 config/I-O error, 2 blow-up accumulator tripped,
3 numerical divergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .energy import NormSeries, norm_E_squared
from .errors import ConfigError, PenflowError
from .config import format_config, parse_config
from .solver import (
    RunSample,
    ScenarioConfig,
    run,
    save_checkpoint,
    simulate,
)
from .spectral import RealField, l2_norm_sq

EXIT_CLEAN = 0
EXIT_CONFIG = 1
EXIT_TRIPPED = 2
EXIT_DIVERGED = 3

# one flattened column per NormSample field (regime expanded)
SERIES_COLUMNS = [
    "t",
    "norm_E_sq",
    "dtP_term",
    "lap_term",
    "grad_energy",
    "ratio",
    "kinetic_energy",
    "h2_norm_P",
    "hminus1_norm_dtP",
    "delta_T_rel",
    "in_regime",
    "T_h2_norm",
    "accumulator",
    "tripped",
]

CHECKPOINT_SAMPLE_STRIDE = 10


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(float(x))


def series_rows(series: NormSeries):
    for sample, blow in zip(series.samples, series.blowup_history):
        yield [
            sample.t,
            sample.norm_E_sq,
            sample.dtP_term,
            sample.lap_term,
            sample.grad_energy,
            sample.ratio,
            sample.kinetic_energy,
            sample.h2_norm_P,
            sample.hminus1_norm_dtP,
            sample.regime.delta_T_rel,
            sample.regime.in_regime,
            sample.regime.T_h2_norm,
            blow.accumulator,
            blow.tripped,
        ]


def write_series_csv(series: NormSeries, path: Path) -> None:
    lines = [",".join(SERIES_COLUMNS)]
    for row in series_rows(series):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary(series: NormSeries, path: Path) -> None:
    cfg = series.scenario
    bound = series.bound
    last = series.samples[-1] if series.samples else None
    worst_delta = max((s.regime.delta_T_rel for s in series.samples), default=0.0)
    lines = [
        "penflow run summary",
        "===================",
        f"samples recorded     : {len(series)}",
        f"final time           : {_fmt(last.t) if last else 'n/a'}",
        f"status               : "
        + (
            f"numerical divergence at t = {series.diverged_at:.6g}"
            if series.diverged_at is not None
            else ("accumulator tripped" if series.tripped else "clean")
        ),
        "",
        "dissipation bound fit (grad_energy <= C * ||P||_E^2)",
        f"  c_fit              : {_fmt(bound.c_fit) if bound else 'n/a'}",
        f"  c_max              : {_fmt(bound.c_max) if bound else 'n/a'}",
        f"  samples_used       : {bound.samples_used if bound else 0}",
        "",
        "blow-up accumulator (integral of ||P||_E^2 dt)",
        f"  final value        : {_fmt(series.blowup.accumulator)}",
        f"  threshold          : {_fmt(series.blowup.threshold)}",
        f"  tripped            : {_fmt(series.blowup.tripped)}",
        "  note: a trip can mean the solution approaches a loss of",
        "  regularity, or merely that the threshold is calibrated too",
        "  low for this mesh and scenario; both readings are possible.",
        "",
        "quasi-incompressible regime (|T - T0|/T0 < 2%)",
        f"  worst delta_T_rel  : {_fmt(worst_delta)}",
        f"  always in regime   : {_fmt(all(s.regime.in_regime for s in series.samples))}",
    ]
    if cfg is not None:
        lines += ["", "scenario", "--------", format_config(cfg).rstrip()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def exit_code(series: NormSeries) -> int:
    if series.diverged_at is not None:
        return EXIT_DIVERGED
    if series.tripped:
        return EXIT_TRIPPED
    return EXIT_CLEAN


def run_scenario(cfg: ScenarioConfig) -> tuple[NormSeries, int]:
    """Execute one scenario, writing series.csv, summary.txt and checkpoints."""
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    sample_count = 0

    def on_sample(rs: RunSample) -> None:
        nonlocal sample_count
        if sample_count % CHECKPOINT_SAMPLE_STRIDE == 0:
            save_checkpoint(outdir / f"u_{rs.index:06d}.ckpt", rs.state.u, rs.state.t)
            save_checkpoint(
                outdir / f"p_model_{rs.index:06d}.ckpt", rs.p_model, rs.state.t
            )
        sample_count += 1

    series = run(cfg, on_sample=on_sample)
    write_series_csv(series, outdir / "series.csv")
    write_summary(series, outdir / "summary.txt")
    return series, exit_code(series)


@dataclass
class TwinReport:
    """Paired-run uniqueness probe: difference norms at matched times."""

    perturbation: float
    times: list[float]
    dp_norm_E: list[float]
    du_l2: list[float]
    divergence_rate: float | None
    diverged: bool = False


def twin_run(cfg: ScenarioConfig, perturbation: float) -> TwinReport:
    """Run the scenario twice, the twin with u0 scaled by (1 + perturbation).

    Reports ||P1 - P2||_E and ||u1 - u2||_L2 at every matched sample, plus
    the least-squares slope of log ||u1 - u2|| against t.
    """
    if perturbation < 0:
        raise ConfigError("perturbation must be nonnegative")
    times: list[float] = []
    dp: list[float] = []
    du: list[float] = []
    diverged = False
    try:
        for a, b in zip(simulate(cfg), simulate(cfg, perturb_u0=perturbation)):
            grid = cfg.grid
            d_p = RealField(grid, a.state.P.data - b.state.P.data)
            d_dtp = RealField(grid, a.dtp.data - b.dtp.data)
            d_u = RealField(grid, a.state.u.data - b.state.u.data)
            times.append(a.sample.t)
            dp.append(float(np.sqrt(norm_E_squared(d_p, d_dtp)[0])))
            du.append(float(np.sqrt(l2_norm_sq(d_u))))
    except PenflowError as exc:
        if hasattr(exc, "time"):
            diverged = True
        else:
            raise
    rate = None
    pts = [(t, d) for t, d in zip(times, du) if d > 0]
    if len(pts) >= 2:
        ts = np.array([p[0] for p in pts])
        logs = np.log(np.array([p[1] for p in pts]))
        rate = float(np.polyfit(ts, logs, 1)[0])
    return TwinReport(perturbation, times, dp, du, rate, diverged)


def write_twin_report(report: TwinReport, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    lines = ["t,dp_norm_E,du_l2"]
    for t, p, u in zip(report.times, report.dp_norm_E, report.du_l2):
        lines.append(f"{_fmt(t)},{_fmt(p)},{_fmt(u)}")
    (outdir / "twin_series.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary = [
        "penflow twin-run summary",
        "========================",
        f"perturbation          : {_fmt(report.perturbation)}",
        f"samples               : {len(report.times)}",
        f"max ||u1-u2||_L2      : {_fmt(max(report.du_l2, default=0.0))}",
        f"max ||P1-P2||_E       : {_fmt(max(report.dp_norm_E, default=0.0))}",
        f"log-difference slope  : {_fmt(report.divergence_rate)}",
        f"diverged              : {_fmt(report.diverged)}",
    ]
    (outdir / "twin_summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")


def read_series_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def export_plot_data(run_dir: Path) -> list[Path]:
    """Write one tidy (t, value) CSV per diagnostic column of series.csv."""
    header, rows = read_series_csv(Path(run_dir) / "series.csv")
    written = []
    for idx, name in enumerate(header):
        if name == "t":
            continue
        out = Path(run_dir) / f"plot_{name}.csv"
        lines = [
            f"# penflow diagnostic export: {name} against time",
            "# columns: t (s), value (model units; empty where undefined)",
            f"t,{name}",
        ]
        for row in rows:
            lines.append(f"{row[0]},{row[idx]}")
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(out)
    return written


def _load_config(args) -> ScenarioConfig:
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    if getattr(args, "output_dir", None):
        cfg = replace(cfg, output_dir=args.output_dir)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, ic=replace(cfg.ic, seed=args.seed))
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="penflow",
        description="Pseudo-spectral Navier-Stokes runs with pressure-energy "
        "norm diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to a scenario configuration file")
        p.add_argument("--output-dir", help="override the configured output path")
        p.add_argument("--seed", type=int, help="override the configured seed")
        return p

    add_config_cmd("run", "integrate a scenario and persist its diagnostics")
    twin = add_config_cmd("twin", "uniqueness probe: paired perturbed runs")
    twin.add_argument(
        "--perturb", type=float, required=True, help="relative initial perturbation"
    )
    add_config_cmd("check", "validate a configuration without running it")
    exp = sub.add_parser("export", help="write plot-ready CSVs from a finished run")
    exp.add_argument("run_dir", help="directory containing series.csv")

    args = parser.parse_args(argv)
    try:
        if args.command == "export":
            written = export_plot_data(Path(args.run_dir))
            for path in written:
                print(path)
            return EXIT_CLEAN
        cfg = _load_config(args)
        if args.command == "check":
            print("configuration OK")
            return EXIT_CLEAN
        if args.command == "run":
            series, code = run_scenario(cfg)
            print(f"wrote {Path(cfg.output_dir) / 'series.csv'} ({len(series)} samples)")
            return code
        report = twin_run(cfg, args.perturb)
        write_twin_report(report, Path(cfg.output_dir))
        print(f"wrote {Path(cfg.output_dir) / 'twin_series.csv'}")
        return EXIT_DIVERGED if report.diverged else EXIT_CLEAN
    except ConfigError as exc:
        for issue in exc.issues:
            print(f"error: {issue}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
