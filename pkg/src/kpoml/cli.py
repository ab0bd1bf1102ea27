"""Command-line front end.

Subcommands:
  train     train one bosonic model from a JSON config
  baseline  train the conventional qubit scheme from a JSON config
  sweep     retrain along an axis (initial amplitude or sample count)
  prepare   simulate adiabatic coherent-state preparation

Every run writes a machine-readable record (JSON), plot-ready CSV files
with fixed headers ("x,f" for fit curves, "nu,abs_F,phase" for spectra,
"t,fidelity" for preparation sweeps), rendered PNG figures (disable with
--no-figures), and a manifest that makes the run reproducible.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
The default output root is $KPOML_OUT_ROOT (falling back to ./runs).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, experiments, report
from .config import ConfigError, config_to_dict, load_config
from .dynamics import adiabatic_prepare
from .experiments import ExperimentConfig, TrainingRecord
from .fock import ModeSpace, TruncationError

TRAIN_VARIANTS = ("single-kpo", "kpo-network")  # scalar-input training pipeline

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def git_blob_sha1(data: bytes) -> str:
    """Hash of the config contents, git blob style."""
    h = hashlib.sha1()
    h.update(b"blob %d\x00" % len(data))
    h.update(data)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def resolve_out_dir(arg_out: str | None, command: str, content_hash: str) -> Path:
    if arg_out:
        return Path(arg_out)
    root = os.environ.get("KPOML_OUT_ROOT", "runs")
    return Path(root) / f"{command}-{content_hash[:8]}"


def apply_seed_override(config: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    """--seed-override S sets the dataset seed to S and the theta seed to S+1."""
    if seed is None:
        return config
    return replace(
        config,
        dataset_seed=int(seed),
        theta_init=replace(config.theta_init, seed=int(seed) + 1),
        theta0=None,
    )


def _csv_number(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines += [",".join(_csv_number(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def write_record(out: Path, record: TrainingRecord, figures: bool) -> None:
    doc = {
        "schema_version": 1,
        "config": config_to_dict(record.config),
        "result": {
            "final_cost": record.final_cost,
            "test_mse": record.test_mse,
            "iterations": record.trace.iterations,
            "n_evaluations": record.trace.n_evaluations,
            "termination": record.trace.reason,
            "final_theta": [float(v) for v in record.final_theta],
            "best_costs": [float(v) for v in record.trace.best_costs],
        },
    }
    (out / "record.json").write_text(json.dumps(doc, indent=1) + "\n")
    write_csv(out / "fit.csv", "x,f", zip(record.fit_x, record.fit_f))
    if record.spectrum is not None:
        write_csv(
            out / "spectrum.csv",
            "nu,abs_F,phase",
            zip(record.spectrum.nu, record.spectrum.amplitude, record.spectrum.phase),
        )
    if figures:
        dataset = experiments.generate_dataset(
            record.config.target, record.config.n_samples, record.config.dataset_seed
        )
        target_f = experiments.target_function(record.config.target)(record.fit_x)
        title = f"{record.config.model.variant} / {record.config.target}"
        report.save_fit_figure(
            out / "fit.png", dataset.xs, dataset.ys, record.fit_x, record.fit_f,
            target_f=target_f, title=title,
        )
        if record.spectrum is not None:
            target_spec = experiments.fourier_transform_numeric(
                experiments.target_function(record.config.target),
                nu=record.spectrum.nu,
                num_points=record.config.analysis.quadrature_points,
            )
            report.save_spectrum_figure(
                out / "spectrum.png", record.spectrum.nu, record.spectrum.amplitude,
                target_amplitude=target_spec.amplitude, title=title,
            )


def write_manifest(out: Path, command: str, config_path: str | None, content_hash: str,
                   started: str, extra: dict | None = None) -> None:
    doc = {
        "command": command,
        "version": __version__,
        "config_path": config_path,
        "config_blob_sha1": content_hash,
        "output_dir": str(out),
        "started": started,
        "finished": _now(),
    }
    if extra:
        doc.update(extra)
    (out / "manifest.json").write_text(json.dumps(doc, indent=1) + "\n")


def _load_and_hash(config_file: str) -> tuple[ExperimentConfig, str]:
    config = load_config(config_file)
    content_hash = git_blob_sha1(Path(config_file).read_bytes())
    return config, content_hash


def _train_command(args, command: str, variants) -> int:
    started = _now()
    config, content_hash = _load_and_hash(args.config)
    if config.model.variant not in variants:
        raise ConfigError(
            "model.variant",
            f"{config.model.variant!r} is not handled by '{command}' "
            f"(expected one of {sorted(variants)})",
        )
    config = apply_seed_override(config, args.seed_override)
    out = resolve_out_dir(args.out, command, content_hash)
    out.mkdir(parents=True, exist_ok=True)
    record = experiments.train(config)
    write_record(out, record, figures=not args.no_figures)
    write_manifest(out, command, args.config, content_hash, started,
                   extra={"elapsed_seconds": record.elapsed_seconds})
    print(
        f"{command}: final cost {record.final_cost:.6e}, test MSE {record.test_mse:.6e}, "
        f"{record.trace.iterations} iterations ({record.trace.reason}) -> {out}"
    )
    return EXIT_OK


def cmd_train(args) -> int:
    return _train_command(args, "train", TRAIN_VARIANTS)


def cmd_baseline(args) -> int:
    return _train_command(args, "baseline", ("qubit-baseline",))


def cmd_sweep(args) -> int:
    started = _now()
    config, content_hash = _load_and_hash(args.config)
    config = apply_seed_override(config, args.seed_override)
    out = resolve_out_dir(args.out, f"sweep-{args.axis}", content_hash)
    out.mkdir(parents=True, exist_ok=True)

    if args.axis == "alpha":
        values = list(experiments.DEFAULT_ALPHA_SWEEP)
        records = experiments.sweep_alpha(config, values, jobs=args.jobs)
        labels = [f"alpha-{v:g}" for v in values]
        summary_header = "alpha,cutoff,final_cost,test_mse,iterations"
        summary_rows = [
            (v, r.config.model.cutoff[0], r.final_cost, r.test_mse, r.trace.iterations)
            for v, r in zip(values, records)
        ]
    else:  # nsamples
        values = list(experiments.DEFAULT_N_SWEEP)
        records = experiments.sweep_sample_size(config, values, jobs=args.jobs)
        labels = [f"n-{v}" for v in values]
        summary_header = "n,final_cost,test_mse,iterations"
        summary_rows = [
            (v, r.final_cost, r.test_mse, r.trace.iterations)
            for v, r in zip(values, records)
        ]

    for label, record in zip(labels, records):
        sub = out / label
        sub.mkdir(parents=True, exist_ok=True)
        write_record(sub, record, figures=not args.no_figures)
    write_csv(out / "summary.csv", summary_header, summary_rows)
    if not args.no_figures:
        if args.axis == "alpha":
            report.save_alpha_sweep_figure(
                out / "summary.png",
                values,
                [(r.spectrum.nu, r.spectrum.amplitude) for r in records],
                [r.final_cost for r in records],
            )
        else:
            report.save_sample_sweep_figure(
                out / "summary.png",
                np.asarray(values, dtype=float),
                np.asarray([r.final_cost for r in records]),
                np.asarray([r.test_mse for r in records]),
            )
    write_manifest(out, "sweep", args.config, content_hash, started,
                   extra={"axis": args.axis, "values": values})
    print(f"sweep {args.axis}: {len(records)} runs -> {out}")
    return EXIT_OK


def cmd_prepare(args) -> int:
    started = _now()
    params = {
        "chi": args.chi, "p": args.p, "r": args.r, "delta0": args.delta0,
        "steps": args.steps, "time": args.time, "cutoff": args.cutoff,
    }
    if args.steps < 1:
        raise ConfigError("steps", "must be >= 1")
    if args.time <= 0:
        raise ConfigError("time", "must be positive")
    if args.chi <= 0:
        raise ConfigError("chi", "must be positive")
    if args.p <= 0:
        raise ConfigError("p", "must be positive")
    if args.r >= 0:
        raise ConfigError("r", "must be negative (selects +sqrt(p/chi))")
    if args.delta0 <= args.chi:
        raise ConfigError("delta0", "must exceed chi")
    content_hash = git_blob_sha1(json.dumps(params, sort_keys=True).encode())
    out = resolve_out_dir(args.out, "prepare", content_hash)
    out.mkdir(parents=True, exist_ok=True)

    result = adiabatic_prepare(
        chi=args.chi, p_final=args.p, r_perturbation=args.r,
        delta_initial=args.delta0, total_time=args.time, num_steps=args.steps,
        space=ModeSpace(args.cutoff),
    )
    write_csv(out / "fidelity.csv", "t,fidelity", zip(result.times, result.fidelities))
    if not args.no_figures:
        report.save_preparation_figure(out / "preparation.png", result.times,
                                       result.fidelities)
    write_manifest(out, "prepare", None, content_hash, started, extra={"params": params})
    print(f"prepare: final fidelity {result.fidelity:.6f} -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpoml",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"kpoml {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_jobs=False):
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output directory (default: $KPOML_OUT_ROOT/<run>)")
        p.add_argument("--seed-override", type=int, default=None,
                       help="replace the dataset seed (theta seed becomes S+1)")
        if with_jobs:
            p.add_argument("--jobs", type=int, default=1,
                           help="parallel worker threads for sweep points")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p_train = sub.add_parser("train", help="train a bosonic model (writes record.json, "
                                           "fit.csv [x,f], spectrum.csv [nu,abs_F,phase])")
    common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_base = sub.add_parser("baseline", help="train the conventional qubit scheme")
    common(p_base)
    p_base.set_defaults(func=cmd_baseline)

    p_sweep = sub.add_parser("sweep", help="retrain along an axis, one subdirectory per "
                                           "point plus summary.csv/summary.png")
    common(p_sweep, with_jobs=True)
    p_sweep.add_argument("--axis", required=True, choices=("alpha", "nsamples"),
                         help="alpha: initial amplitudes 1,3,5; nsamples: N = 10..1000")
    p_sweep.set_defaults(func=cmd_sweep)

    p_prep = sub.add_parser("prepare", help="adiabatic coherent-state preparation "
                                            "(writes fidelity.csv [t,fidelity])")
    p_prep.add_argument("--chi", type=float, default=0.1, help="Kerr nonlinearity")
    p_prep.add_argument("--p", type=float, default=0.4, help="final pump amplitude")
    p_prep.add_argument("--r", type=float, default=-0.05, help="coherent-drive perturbation (< 0)")
    p_prep.add_argument("--delta0", type=float, default=1.0, help="initial detuning (> chi)")
    p_prep.add_argument("--steps", type=int, default=400, help="piecewise-constant steps")
    p_prep.add_argument("--time", type=float, default=200.0, help="total sweep duration")
    p_prep.add_argument("--cutoff", type=int, default=25, help="Fock cutoff")
    p_prep.add_argument("--out", help="output directory")
    p_prep.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_prep.set_defaults(func=cmd_prepare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"kpoml: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"kpoml: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"kpoml: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failure
        print(f"kpoml: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
