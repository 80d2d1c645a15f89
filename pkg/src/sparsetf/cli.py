"""Command-line surface: analyze, sweep, metrics, synth, inspect.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
failure. Expected error classes print one message to stderr, never a
traceback. Flags override config-file keys (``key = value`` lines, same
names as the long flags with dashes replaced by underscores).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from pathlib import Path

import numpy as np

from . import _kernel
from .errors import (
    AboveNyquist,
    CGNoConvergence,
    EmptyFile,
    IncompleteCover,
    LengthMismatch,
    NonDivisibleHop,
    NotPainless,
    ParamsInvalid,
    ShapeMismatch,
    SidecarMismatch,
    SparseTFError,
    UnsupportedFormat,
)
from .gabor import GaborSystem, Signal, build_system, dgt, feasibility_residual
from .metrics import SWEEP_CSV_FIELDS, SweepRecord, cosine_similarity, normalized_l1, penalty_ratio
from .penalties import PENALTY_PRESETS, make_penalty
from .signal_io import read_matrix, read_wav, render_spectrogram, synthesize, write_matrix, write_wav
from .solver import SolverParams, run, validate_params

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

_CONFIG_ERRORS = (
    ParamsInvalid,
    NonDivisibleHop,
    NotPainless,
    IncompleteCover,
    AboveNyquist,
    LengthMismatch,
    ShapeMismatch,
    ValueError,
)
_IO_ERRORS = (UnsupportedFormat, EmptyFile, SidecarMismatch, OSError)
_NUMERICAL_ERRORS = (CGNoConvergence, FloatingPointError)

DEFAULTS = SolverParams()


def _parse_window(text: str) -> tuple[str, int]:
    kind, sep, length = text.partition(":")
    if not sep:
        raise ValueError(f"window must be KIND:LENGTH (e.g. hann:256), got {text!r}")
    kind = {"rect": "rectangular"}.get(kind, kind)
    if kind not in ("hann", "rectangular"):
        raise ValueError(f"CLI windows are hann or rectangular, got {kind!r}")
    return kind, int(length)


def _parse_float_list(text: str) -> list[float]:
    items = [t for t in text.replace(";", ",").split(",") if t.strip()]
    return [float(t) for t in items]


def _parse_name_list(text: str) -> list[str]:
    return [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


# Converters for config-file values, keyed by destination name.
_CONFIG_PARSERS = {
    "window": str,
    "hop": int,
    "channels": int,
    "penalty": str,
    "penalties": str,
    "lam": float,
    "lambdas": str,
    "scale": float,
    "tau": float,
    "mu": float,
    "rho": float,
    "iters": int,
    "snap": _parse_bool,
    "seed": int,
    "diag_stride": int,
    "range_db": float,
    "jobs": int,
    "input": str,
    "output_dir": str,
    "csv": str,
    "artifacts_dir": str,
}


def _load_config_file(path: str) -> dict:
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip().replace("-", "_")
        if key == "lambda":
            key = "lam"
        if key not in _CONFIG_PARSERS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _CONFIG_PARSERS[key](value.strip())
    return values


def _add_transform_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", default="hann:256", help="analysis window KIND:LENGTH (default hann:256)")
    p.add_argument("--hop", type=int, default=32, help="hop size in samples (default 32)")
    p.add_argument("--channels", type=int, default=512, help="frequency channels M (default 512)")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=5.0, help="penalty strength (default 5)")
    p.add_argument("--scale", type=float, default=1.0, help="fixed multiplier on psi (default 1)")
    p.add_argument("--tau", type=float, default=DEFAULTS.tau, help=f"primal step (default {DEFAULTS.tau})")
    p.add_argument("--mu", type=float, default=DEFAULTS.mu, help=f"dual step (default {DEFAULTS.mu})")
    p.add_argument("--rho", type=float, default=DEFAULTS.rho, help=f"relaxation in (0,2) (default {DEFAULTS.rho})")
    p.add_argument("--iters", type=int, default=DEFAULTS.iterations, help=f"iteration count (default {DEFAULTS.iterations})")
    p.add_argument("--snap", type=_parse_bool, default=True, metavar="BOOL",
                   help="project the result onto the constraint set (default true)")
    p.add_argument("--diag-stride", type=int, default=10, help="diagnostics sampling stride (default 10)")
    p.add_argument("--seed", type=int, default=0, help="recorded in run summaries; the pipeline itself is deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsetf",
        description="Customizable sparse time-frequency representations via convex weighted-magnitude penalties.",
    )
    parser.add_argument("--config", help="key = value config file; flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="solve one program and write coefficient/weight artifacts")
    p.add_argument("--input", required=True, help="input WAV file")
    p.add_argument("--output-dir", required=True, help="directory for matrices, images and summary")
    _add_transform_flags(p)
    p.add_argument("--penalty", default="tv", choices=sorted(PENALTY_PRESETS), help="penalty preset (default tv)")
    _add_solver_flags(p)
    p.add_argument("--range-db", type=float, default=100.0, help="spectrogram dynamic range (default 100)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="run a lambda grid over one or more penalties, emit CSV")
    p.add_argument("--input", required=True, help="input WAV file")
    p.add_argument("--csv", required=True, help="output CSV path")
    p.add_argument("--lambdas", default="0.1,5,40,1e4", help="comma-separated lambda grid")
    p.add_argument("--penalties", default="l1,nuclear,tv,harmonic", help="comma-separated penalty presets")
    p.add_argument("--artifacts-dir", default=None, help="also write per-run matrices here")
    p.add_argument("--jobs", type=int, default=1, help="concurrent runs (1 = deterministic sequential)")
    _add_transform_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a synthetic fixture signal")
    p.add_argument("--kind", default="tone", choices=["tone", "two_tone", "linear_chirp", "impulse_train", "tone_plus_impulses"])
    p.add_argument("--length", type=int, default=16000, help="sample count (default 16000)")
    p.add_argument("--sample-rate", type=float, default=16000.0, help="sample rate in Hz (default 16000)")
    p.add_argument("--freq", type=float, default=440.0, help="tone/chirp base frequency")
    p.add_argument("--freq2", type=float, default=2080.0, help="second tone / chirp end frequency")
    p.add_argument("--period", type=int, default=256, help="impulse period in samples")
    p.add_argument("--format", default="wav", choices=["wav", "matrix"], help="output as WAV or raw matrix")
    p.add_argument("--output", required=True, help="output path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("metrics", help="recompute sweep metrics from stored artifacts")
    p.add_argument("--coeffs", required=True, help="coefficient matrix file")
    p.add_argument("--sigma", default=None, help="weight matrix file (enables cosine similarity)")
    p.add_argument("--input", required=True, help="the analyzed WAV file (rebuilds the reference transform)")
    p.add_argument("--penalty", default=None, choices=sorted(PENALTY_PRESETS), help="override sidecar penalty")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="override sidecar lambda")
    p.add_argument("--scale", type=float, default=1.0, help="fixed multiplier on psi (default 1)")
    p.add_argument("--csv", default="-", help="output CSV path, '-' for stdout (default)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("inspect", help="print sidecar metadata and grid statistics")
    p.add_argument("--path", required=True, help="matrix file to inspect")
    p.set_defaults(func=cmd_inspect)
    return parser


def _build_system_for(args, signal_length: int) -> GaborSystem:
    kind, length = _parse_window(args.window)
    return build_system(kind, length, args.hop, args.channels, signal_length)


def _solver_params(args) -> SolverParams:
    return SolverParams(tau=args.tau, mu=args.mu, rho=args.rho, iterations=args.iters)


def _sidecar(args, system: GaborSystem, signal: Signal, lam: float, penalty_kind: str) -> dict:
    kind, length = _parse_window(args.window)
    return {
        "hop": system.hop,
        "channels": system.channels,
        "window_length": length,
        "window_kind": kind,
        "sample_rate": signal.sample_rate,
        "lambda": lam,
        "penalty_kind": penalty_kind,
    }


def _solve_one(system, signal, penalty_name, lam, args):
    penalty = make_penalty(penalty_name, system.shape, lam, scale=args.scale)
    x_star, sigma, diag = run(
        system,
        signal,
        penalty,
        _solver_params(args),
        diag_stride=args.diag_stride,
        snap_to_feasible=args.snap,
    )
    if not (np.all(np.isfinite(x_star)) and np.all(np.isfinite(sigma))):
        raise FloatingPointError("solver produced non-finite values")
    return penalty, x_star, sigma, diag


def cmd_analyze(args) -> int:
    signal = read_wav(args.input, hop=args.hop)
    system = _build_system_for(args, len(signal))
    started = time.perf_counter()
    penalty, x_star, sigma, diag = _solve_one(system, signal, args.penalty, args.lam, args)
    wall = time.perf_counter() - started

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    side = _sidecar(args, system, signal, args.lam, args.penalty)
    write_matrix(out / "coefficients.bin", x_star, side)
    write_matrix(out / "weights.bin", sigma, side)
    render_spectrogram(out / "coefficients.pgm", x_star, range_db=args.range_db)
    render_spectrogram(out / "weights.pgm", sigma, range_db=args.range_db)
    summary = {
        "input": str(args.input),
        "penalty": args.penalty,
        "lambda": args.lam,
        "scale": args.scale,
        "iterations": args.iters,
        "seed": args.seed,
        "objective": diag.objective[-1],
        "pre_snap_residual": diag.pre_snap_residual,
        "post_snap_residual": feasibility_residual(system, x_star, signal),
        "wall_time_s": wall,
        "kernel_backend": _kernel.backend_name,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(
        f"analyze: {args.penalty} lambda={args.lam:g} objective={summary['objective']:.6g} "
        f"residual={summary['pre_snap_residual']:.3g} ({wall:.2f}s)"
    )
    return EXIT_OK


def _sweep_record(system, signal, penalty, x_star, sigma, diag, lam) -> SweepRecord:
    reference = dgt(system, signal)
    return SweepRecord(
        lam=lam,
        penalty_ratio=penalty_ratio(penalty, x_star, reference),
        cosine_sim=cosine_similarity(np.abs(x_star), sigma),
        normalized_l1=normalized_l1(x_star, reference),
        feasibility_residual=diag.pre_snap_residual,
    )


def cmd_sweep(args) -> int:
    lambdas = _parse_float_list(args.lambdas)
    penalties = _parse_name_list(args.penalties)
    if not lambdas:
        raise ValueError("empty lambda list")
    if not penalties:
        raise ValueError("empty penalty list")
    for name in penalties:
        if name not in PENALTY_PRESETS:
            raise ValueError(f"unknown penalty {name!r}; choose from {sorted(PENALTY_PRESETS)}")
    signal = read_wav(args.input, hop=args.hop)
    system = _build_system_for(args, len(signal))
    # Fail fast on step sizes before launching any run.
    validate_params(_solver_params(args), make_penalty(penalties[0], system.shape, 0.0).operator)

    tasks = [(name, lam) for name in penalties for lam in lambdas]

    def solve(index: int):
        name, lam = tasks[index]
        penalty, x_star, sigma, diag = _solve_one(system, signal, name, lam, args)
        if args.artifacts_dir:
            adir = Path(args.artifacts_dir)
            adir.mkdir(parents=True, exist_ok=True)
            side = _sidecar(args, system, signal, lam, name)
            write_matrix(adir / f"{name}_lambda{lam:g}_coefficients.bin", x_star, side)
            write_matrix(adir / f"{name}_lambda{lam:g}_weights.bin", sigma, side)
        return name, _sweep_record(system, signal, penalty, x_star, sigma, diag, lam)

    # Rows are written in task order and flushed as soon as a prefix is
    # complete, so partial results survive an aborted sweep.
    with open(args.csv, "w", newline="") as fh:
        fh.write("penalty," + ",".join(SWEEP_CSV_FIELDS) + "\n")
        fh.flush()
        done: dict[int, tuple[str, SweepRecord]] = {}
        next_to_write = 0

        def flush_ready():
            nonlocal next_to_write
            while next_to_write in done:
                name, rec = done.pop(next_to_write)
                fh.write(",".join([name] + rec.as_row()) + "\n")
                fh.flush()
                next_to_write += 1

        if args.jobs <= 1:
            for i in range(len(tasks)):
                done[i] = solve(i)
                flush_ready()
        else:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                futures = {pool.submit(solve, i): i for i in range(len(tasks))}
                pending = set(futures)
                while pending:
                    finished, pending = wait(pending, return_when=FIRST_COMPLETED)
                    for fut in finished:
                        done[futures[fut]] = fut.result()
                    flush_ready()
    print(f"sweep: wrote {len(tasks)} rows to {args.csv}")
    return EXIT_OK


def cmd_synth(args) -> int:
    params = {
        "f": args.freq,
        "f1": args.freq if args.kind == "two_tone" else args.freq,
        "f2": args.freq2,
        "f0": args.freq,
        "period": args.period,
    }
    if args.kind == "linear_chirp":
        params["f1"] = args.freq2
    signal = synthesize(args.kind, args.length, args.sample_rate, **params)
    if args.format == "wav":
        write_wav(args.output, signal)
    else:
        write_matrix(
            args.output,
            signal.samples.real[None, :],
            {"sample_rate": args.sample_rate, "kind": args.kind},
        )
    print(f"synth: wrote {args.kind} fixture ({args.length} samples) to {args.output}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    x_star, meta = read_matrix(args.coeffs)
    x_star = np.asarray(x_star, dtype=np.complex128)
    try:
        hop = int(meta["hop"])
        channels = int(meta["channels"])
        window_length = int(meta["window_length"])
        window_kind = meta.get("window_kind", "hann")
    except (KeyError, TypeError, ValueError) as exc:
        raise SidecarMismatch(f"sidecar lacks transform parameters: {exc}") from exc
    m, n = x_star.shape
    if (m, n) != (channels, x_star.shape[1]):
        raise SidecarMismatch(f"grid shape {(m, n)} disagrees with sidecar channels {channels}")
    signal = read_wav(args.input, hop=hop)
    if len(signal) != n * hop:
        raise SidecarMismatch(
            f"input yields {len(signal) // hop} frames, coefficient grid has {n}"
        )
    system = build_system(window_kind, window_length, hop, channels, len(signal))
    penalty_kind = args.penalty or meta.get("penalty_kind", "l1")
    lam = args.lam if args.lam is not None else float(meta.get("lambda") or 0.0)
    penalty = make_penalty(penalty_kind, system.shape, lam, scale=args.scale)
    reference = dgt(system, signal)

    if args.sigma is not None:
        sigma, _ = read_matrix(args.sigma)
        sigma = np.asarray(sigma, dtype=np.float64)
        if sigma.shape != x_star.shape:
            raise SidecarMismatch(f"weight shape {sigma.shape} != coefficient shape {x_star.shape}")
        cos = cosine_similarity(np.abs(x_star), sigma)
    else:
        cos = float("nan")

    record = SweepRecord(
        lam=lam,
        penalty_ratio=penalty_ratio(penalty, x_star, reference),
        cosine_sim=cos,
        normalized_l1=normalized_l1(x_star, reference),
        feasibility_residual=feasibility_residual(system, x_star, signal),
    )
    lines = [",".join(SWEEP_CSV_FIELDS), ",".join(record.as_row())]
    if args.csv == "-":
        print("\n".join(lines))
    else:
        Path(args.csv).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_inspect(args) -> int:
    grid, meta = read_matrix(args.path)
    mag = np.abs(grid)
    print(f"path: {args.path}")
    for key in sorted(meta):
        print(f"  {key}: {meta[key]}")
    print(f"  max |entry|: {mag.max():.6g}")
    print(f"  mean |entry|: {mag.mean():.6g}")
    print(f"  nonzero entries: {int(np.count_nonzero(mag))} / {mag.size}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    probe, _ = parser.parse_known_args(argv)
    if probe.config:
        try:
            parser.set_defaults(**_load_config_file(probe.config))
        except FileNotFoundError as exc:
            print(f"sparsetf: error: {exc}", file=sys.stderr)
            return EXIT_IO
        except ValueError as exc:
            print(f"sparsetf: error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"sparsetf: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _NUMERICAL_ERRORS as exc:
        print(f"sparsetf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _IO_ERRORS as exc:
        print(f"sparsetf: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _CONFIG_ERRORS as exc:
        print(f"sparsetf: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SparseTFError as exc:
        print(f"sparsetf: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
