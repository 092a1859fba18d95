"""Command-line front end.

Subcommands: ``simulate``, ``ensemble``, ``predict``, ``fit``,
``waves table``, ``evans table``, ``measure``, ``compare``.  Every command
that produces artifacts writes them under ``<out>/<command>/<name>/``
where the name defaults to a UTC timestamp.  Exit codes: 0 success,
1 usage error, 2 numerical failure, 3 ensemble finished with failed
trials.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as runio
from .config import SolverConfig, config_echo, parse_config_file
from .energy import EnergyPeriodTable, free_energy, kohn_otto_length, period_from_energy, wave_window_energy
from .ensemble import compare_coupled, run_ensemble
from .evans import EigTable, build_eig_table, default_amplitudes
from .grid import Field, Grid
from .predictors import PredictorConfig, fit_pfit, predicted_energy_curve
from .series import TimeSeries
from .solver import run
from .waves import Params, periodic_wave

__all__ = ["main"]


class UsageError(Exception):
    """Bad invocation or unreadable input; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for numerical
    # failure here, so usage problems are remapped to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _thresholds(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("threshold list is empty")
    return vals


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="run configuration file (key = value lines)")
    common.add_argument("--out", help="output root directory (default: config out_dir or 'out')")
    common.add_argument("--name", help="run directory name (default: UTC timestamp)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker processes for trial-parallel commands")

    parser = _Parser(prog="bchsim",
                     description="Phase-separation runs, coarsening tables, and predictors.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common],
                   help="integrate one configured run")

    p_ens = sub.add_parser("ensemble", parents=[common],
                           help="repeat a run over derived seeds and average")
    p_ens.add_argument("--trials", type=int, required=True)
    p_ens.add_argument("--no-overlays", action="store_true",
                       help="skip predictor overlay curves")
    p_ens.add_argument("--table", help="eigenvalue table CSV to reuse for overlays")

    p_pred = sub.add_parser("predict", parents=[common],
                            help="evaluate a period predictor on a time grid")
    p_pred.add_argument("--method", choices=("langer", "eig"), default="langer")
    p_pred.add_argument("--half", action="store_true",
                        help="half-factor variant of the eigenvalue rate")
    p_pred.add_argument("--p0", type=float, help="starting period (default: spinodal period)")
    p_pred.add_argument("--t0", type=float, default=0.0)
    p_pred.add_argument("--t-max", type=float, default=20.0)
    p_pred.add_argument("--samples", type=int, default=201)
    p_pred.add_argument("--kappa", type=float, help="override interface parameter")
    p_pred.add_argument("--table", help="eigenvalue table CSV (eig method)")

    p_fit = sub.add_parser("fit", parents=[common],
                           help="fit the logarithmic period law to a series CSV")
    p_fit.add_argument("--series", required=True, help="series.csv from a run")
    p_fit.add_argument("--t-max", type=float, default=20.0)
    p_fit.add_argument("--t0", type=float, default=0.0)
    p_fit.add_argument("--p0", type=float)
    p_fit.add_argument("--kappa", type=float)

    p_waves = sub.add_parser("waves", help="periodic wave tables")
    waves_sub = p_waves.add_subparsers(dest="waves_command", required=True)
    w_table = waves_sub.add_parser("table", parents=[common],
                                   help="amplitude, period, modulus, energy table")
    w_table.add_argument("--da", type=float, default=0.01)
    w_table.add_argument("--kappa", type=float)

    p_evans = sub.add_parser("evans", help="Floquet eigenvalue tables")
    evans_sub = p_evans.add_subparsers(dest="evans_command", required=True)
    e_table = evans_sub.add_parser("table", parents=[common],
                                   help="leading eigenvalue per amplitude")
    e_table.add_argument("--da", type=float, default=0.01)
    e_table.add_argument("--p-max", type=float)
    e_table.add_argument("--rk-steps", type=int, default=2048)
    e_table.add_argument("--kappa", type=float)

    p_meas = sub.add_parser("measure", parents=[common],
                            help="energy, period, interface length of one snapshot")
    p_meas.add_argument("--snapshot", required=True, help="CSV with columns x,phi[,v]")
    p_meas.add_argument("--kappa", type=float)

    p_cmp = sub.add_parser("compare", parents=[common],
                           help="coupled run against its uncoupled twin")
    p_cmp.add_argument("--uncoupled-config",
                       help="explicit uncoupled configuration (default: derived twin)")
    p_cmp.add_argument("--thresholds", type=_thresholds, default=(1.12, 1.495))
    return parser


def _load_config(args, required: bool = True) -> SolverConfig | None:
    path = getattr(args, "config", None)
    if path is None:
        if required:
            raise UsageError("this command needs --config")
        return None
    try:
        return parse_config_file(path)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}")
    except ValueError as exc:
        raise UsageError(f"bad config {path}: {exc}")


def _params_for(args) -> Params:
    cfg = _load_config(args, required=False)
    params = cfg.params if cfg is not None else SolverConfig().params
    kappa = getattr(args, "kappa", None)
    if kappa is not None:
        if kappa <= 0:
            raise UsageError("--kappa must be positive")
        params = replace(params, kappa=kappa)
    return params


def _out_dir(args, command: str, cfg: SolverConfig | None = None) -> Path:
    root = args.out
    if root is None and cfg is not None and cfg.out_dir is not None:
        root = cfg.out_dir
    return runio.run_directory(root or "out", command, args.name)


def _echo_config(out_dir: Path, cfg: SolverConfig | None) -> None:
    if cfg is not None:
        (out_dir / "config.echo").write_text(config_echo(cfg))


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, "simulate", cfg)
    result = run(cfg)
    report = runio.write_run(out, result, command="simulate")
    print(f"wrote {out}")
    print(f"records={report['series']['records']} "
          f"final_energy={report['series'].get('final_free_energy'):.6g} "
          f"resolution_ok={report['resolution_ok']}")
    return 0


def _load_eig_table(path, params: Params) -> EigTable:
    try:
        return EigTable.from_csv(path, params)
    except OSError as exc:
        raise UsageError(f"cannot read table: {exc}")
    except ValueError as exc:
        raise UsageError(f"bad table {path}: {exc}")


def _cmd_ensemble(args) -> int:
    cfg = _load_config(args)
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    table = None
    if args.table is not None:
        table = _load_eig_table(args.table, cfg.params)
    out = _out_dir(args, "ensemble", cfg)
    report = run_ensemble(cfg, args.trials, workers=max(1, args.threads),
                          overlays=not args.no_overlays, eig_table=table)
    _echo_config(out, cfg)
    paths: list[str | None] = []
    for i, series in enumerate(report.trial_series):
        if series is None:
            paths.append(None)
            continue
        name = f"trial_{i:02d}.csv"
        series.to_csv(out / name)
        paths.append(name)
    report.trial_paths = paths
    TimeSeries(t=report.times, free_energy=report.mean_free_energy,
               period=report.mean_period).to_csv(out / "mean.csv")
    payload = report.summary()
    payload.update({"command": "ensemble", "mean_series": "mean.csv"})
    if report.overlays is not None:
        report.overlays.to_csv(out / "overlays.csv")
        payload["overlays"] = "overlays.csv"
    runio.write_report(out, payload)
    print(f"wrote {out}")
    print(f"trials={len(report.completed)}/{report.requested} partial={report.partial}")
    return 3 if report.partial else 0


def _cmd_predict(args) -> int:
    params = _params_for(args)
    if args.half and args.method != "eig":
        raise UsageError("--half only applies to --method eig")
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    if args.t_max <= args.t0:
        raise UsageError("--t-max must exceed --t0")
    variant = "langer" if args.method == "langer" else (
        "eig_half" if args.half else "eig_full")
    table = None
    if args.method == "eig":
        table = (_load_eig_table(args.table, params) if args.table is not None
                 else build_eig_table(params))
    pcfg = PredictorConfig(p0=args.p0, t0=args.t0, variant=variant, eig_table=table)
    grid = np.linspace(args.t0, args.t_max, args.samples)
    curve = predicted_energy_curve(grid, pcfg, params)
    out = _out_dir(args, "predict", None)
    _echo_config(out, _load_config(args, required=False))
    curve.to_csv(out / "series.csv")
    runio.write_report(out, {
        "command": "predict", "method": args.method, "variant": variant,
        "p0": float(pcfg.start_period(params)), "t0": float(args.t0),
        "t_max": float(args.t_max), "samples": int(args.samples),
        "kappa": float(params.kappa), "series": "series.csv",
    })
    print(f"wrote {out}")
    return 0


def _cmd_fit(args) -> int:
    params = _params_for(args)
    try:
        series = TimeSeries.from_csv(args.series)
    except OSError as exc:
        raise UsageError(f"cannot read series: {exc}")
    result = fit_pfit(series, params, t_max=args.t_max, p0=args.p0, t0=args.t0)
    payload = {"c1": float(result.c1), "c2": float(result.c2),
               "objective": float(result.objective)}
    print(json.dumps(payload))
    out = _out_dir(args, "fit", None)
    runio.write_report(out, dict(payload, command="fit", series=str(args.series),
                                 t0=float(args.t0), t_max=float(args.t_max),
                                 p0=None if args.p0 is None else float(args.p0)))
    return 0


def _cmd_waves_table(args) -> int:
    params = _params_for(args)
    if args.da <= 0:
        raise UsageError("--da must be positive")
    binodal = params.binodal
    amps = np.arange(args.da, binodal, args.da)
    amps = amps[amps < binodal * (1.0 - 1e-12)]
    lines = ["amplitude,period,modulus,energy"]
    for a in amps:
        wave = periodic_wave(float(a), params)
        energy = wave_window_energy(float(a), params)
        lines.append(f"{float(a)!r},{float(wave.period)!r},"
                     f"{float(wave.modulus)!r},{float(energy)!r}")
    out = _out_dir(args, "waves", None)
    (out / "table.csv").write_text("\n".join(lines) + "\n")
    runio.write_report(out, {
        "command": "waves table", "rows": int(len(amps)),
        "da": float(args.da), "kappa": float(params.kappa), "table": "table.csv",
    })
    print(f"wrote {out} ({len(amps)} rows)")
    return 0


def _cmd_evans_table(args) -> int:
    params = _params_for(args)
    if args.da <= 0:
        raise UsageError("--da must be positive")
    amps = default_amplitudes(params, da=args.da, p_max=args.p_max)
    table = build_eig_table(params, amplitudes=amps, rk_steps=args.rk_steps,
                            p_max=args.p_max, workers=max(1, args.threads))
    out = _out_dir(args, "evans", None)
    table.to_csv(out / "table.csv")
    runio.write_report(out, {
        "command": "evans table", "rows": int(table.amplitudes.size),
        "da": float(args.da), "rk_steps": int(args.rk_steps),
        "kappa": float(params.kappa), "table": "table.csv",
    })
    print(f"wrote {out} ({table.amplitudes.size} rows)")
    return 0


def _read_snapshot_any(path) -> tuple[np.ndarray, np.ndarray]:
    """Columns (x, phi) of a snapshot CSV; a velocity column is ignored."""
    try:
        with open(path) as fh:
            header = fh.readline().strip().lower().split(",")
            raw = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise UsageError(f"cannot read snapshot: {exc}")
    except ValueError as exc:
        raise UsageError(f"bad snapshot {path}: {exc}")
    if len(header) < 2 or header[0] != "x" or header[1] != "phi":
        raise UsageError(f"snapshot header must start with x,phi; got {header}")
    if raw.shape[1] != len(header):
        raise UsageError(f"snapshot {path}: {raw.shape[1]} columns, header names {len(header)}")
    return raw[:, 0], raw[:, 1]


def _cmd_measure(args) -> int:
    params = _params_for(args)
    x, phi_vals = _read_snapshot_any(args.snapshot)
    n = x.size
    if n < 2 or n & (n - 1):
        raise UsageError(f"snapshot needs a power-of-two sample count, got {n}")
    grid = Grid(n, -float(x[0]))
    if not np.allclose(grid.x, x, rtol=0.0, atol=1e-9 * grid.half_length):
        raise UsageError("snapshot x column is not the uniform grid this tool expects")
    phi = Field(grid, phi_vals)
    energy = free_energy(phi, params)
    table = EnergyPeriodTable.build(params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        period = period_from_energy(energy, table)
    ko = kohn_otto_length(Field(grid, phi_vals - phi.mean()))
    text = "energy,period,ko_length\n" + \
        f"{float(energy)!r},{float(period)!r},{float(ko)!r}\n"
    sys.stdout.write(text)
    out = _out_dir(args, "measure", None)
    (out / "measure.csv").write_text(text)
    runio.write_report(out, {
        "command": "measure", "snapshot": str(args.snapshot),
        "energy": float(energy), "period": float(period), "ko_length": float(ko),
        "kappa": float(params.kappa),
    })
    return 0


def _cmd_compare(args) -> int:
    coupled_cfg = _load_config(args)
    uncoupled_cfg = None
    if args.uncoupled_config is not None:
        try:
            uncoupled_cfg = parse_config_file(args.uncoupled_config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
        except ValueError as exc:
            raise UsageError(f"bad config {args.uncoupled_config}: {exc}")
    out = _out_dir(args, "compare", coupled_cfg)
    report = compare_coupled(coupled_cfg, uncoupled_cfg,
                             thresholds=args.thresholds,
                             workers=max(1, args.threads))
    runio.write_run(out / "coupled", report.coupled, command="compare")
    runio.write_run(out / "uncoupled", report.uncoupled, command="compare")
    payload = report.summary()
    payload.update({"command": "compare", "coupled_dir": "coupled",
                    "uncoupled_dir": "uncoupled"})
    runio.write_report(out, payload)
    print(f"wrote {out}")
    for row in report.rows():
        bound = " (lower bound)" if row["ratio_is_lower_bound"] else ""
        print(f"threshold {row['threshold']}: coupled {row['coupled_time']:.4g}"
              f"{'*' if row['coupled_censored'] else ''}, uncoupled "
              f"{row['uncoupled_time']:.4g}{'*' if row['uncoupled_censored'] else ''}, "
              f"ratio {row['ratio']:.4g}{bound}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "simulate": _cmd_simulate,
        "ensemble": _cmd_ensemble,
        "predict": _cmd_predict,
        "fit": _cmd_fit,
        "waves": _cmd_waves_table,
        "evans": _cmd_evans_table,
        "measure": _cmd_measure,
        "compare": _cmd_compare,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"bchsim: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"bchsim: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
