"""Experiment command line: sweeps, Monte Carlo validation, optimization.

Subcommands share ``--config/--out/--seed/--threads``; results land in CSV
files with a leading comment line recording config hash, seed and package
version.  Output is byte-deterministic for a fixed (config, seed) whatever
the worker count; wall-clock columns are therefore zero unless ``--timing``
is passed.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 validation
gate failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time

import numpy as np

from . import __version__
from .config import (ConfigError, SystemConfig, config_hash, load_config,
                     with_axis_value)
from .detse import NoConvergence, SseEvaluator
from .frames import FrameSchedule
from .mcoracle import validate_deterministic
from .optimizer import optimize_beamforming, optimize_frames, uniform_beamforming

THREADS_ENV = "AGINGMIMO_THREADS"

SWEEP_HEADER = ["axis", "value", "sse_bits", "opt_q", "opt_M", "fp_iters", "runtime_ms"]
VALIDATE_HEADER = ["user", "se_emp", "se_det", "rel_err", "n_samples", "seed"]
OPTIMIZE_HEADER = ["candidate", "q", "M", "sse_bits", "fp_iters", "best", "w"]


def resolve_threads(flag: int | None) -> int:
    """Worker count: the --threads flag beats the env var beats cpu count."""
    if flag is not None:
        if flag < 1:
            raise ConfigError("threads", "must be >= 1")
        return flag
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(THREADS_ENV, "must be a positive integer") from None
        if value < 1:
            raise ConfigError(THREADS_ENV, "must be a positive integer")
        return value
    return os.cpu_count() or 1


def _fmt(value) -> str:
    if isinstance(value, (bool, int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _fmt_q(q) -> str:
    return "|".join(str(v) for v in q)


def _fmt_w(w: np.ndarray) -> str:
    cols = []
    for j in range(w.shape[1]):
        cols.append(";".join(f"{_fmt(c.real)}:{_fmt(c.imag)}" for c in w[:, j]))
    return "|".join(cols)


def _write_csv(path: str, cfg: SystemConfig, seed: int, header, rows) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash(cfg)} seed={seed} version={__version__}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def run_sweep(cfg: SystemConfig, out: str, seed: int, threads: int,
              timing: bool) -> int:
    if cfg.sweep is None:
        raise ConfigError("sweep", "block is required by the sweep command")
    spec = cfg.sweep
    rows = []
    for value in spec.values:
        start = time.perf_counter()
        cfg_v = with_axis_value(cfg, spec.axis, value)
        try:
            if spec.optimize_q:
                res = optimize_frames(cfg_v, optimize_w=spec.optimize_w,
                                      threads=threads)
                schedule, w_best = res.schedule, res.w
                sse, fp_iters = res.sse, res.fp_iterations
            else:
                schedule = FrameSchedule(cfg_v.q)
                ev = SseEvaluator(cfg_v, schedule)
                if spec.optimize_w and cfg_v.n_t > 1:
                    bres = optimize_beamforming(ev)
                    w_best, sse = bres.w, bres.sse
                else:
                    w_best = uniform_beamforming(cfg_v.n_t, cfg_v.k)
                    sse = ev.sse(w_best)
                fp_iters = ev.report(w_best).iterations
        except NoConvergence as exc:
            print(f"solver failure at {spec.axis}={value}: {exc}", file=sys.stderr)
            return 3
        runtime_ms = int(round((time.perf_counter() - start) * 1000.0)) if timing else 0
        rows.append([spec.axis, _fmt(value), _fmt(sse), _fmt_q(schedule.q),
                     str(schedule.num_frames), str(fp_iters), str(runtime_ms)])
        line = (f"{spec.axis}={value}: sse={sse:.6f} q={_fmt_q(schedule.q)} "
                f"M={schedule.num_frames} fp_iters={fp_iters}")
        if spec.mc_check is not None:
            report = validate_deterministic(
                cfg_v, schedule=schedule, w=w_best,
                num_samples=spec.mc_check.num_samples, seed=spec.mc_check.seed)
            line += f" mc_max_rel_err={report.max_rel_err:.4f}"
        print(line)
    _write_csv(out, cfg, seed, SWEEP_HEADER, rows)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def run_validate(cfg: SystemConfig, out: str, seed: int, threads: int,
                 timing: bool) -> int:
    schedule = FrameSchedule(cfg.q)
    w = uniform_beamforming(cfg.n_t, cfg.k)
    report = validate_deterministic(cfg, schedule=schedule, w=w,
                                    num_samples=cfg.mc.num_samples, seed=seed)
    rows = []
    for i in range(cfg.k):
        rows.append([str(i), _fmt(report.se_emp[i]), _fmt(report.se_det[i]),
                     _fmt(report.rel_err[i]), str(report.num_samples), str(seed)])
        print(f"user {i}: se_emp={report.se_emp[i]:.6f} "
              f"se_det={report.se_det[i]:.6f} rel_err={report.rel_err[i]:.4%}")
    _write_csv(out, cfg, seed, VALIDATE_HEADER, rows)
    print(f"wrote {cfg.k} rows to {out}")
    if report.max_rel_err > cfg.mc.threshold:
        print(f"validation gate FAILED: max rel err {report.max_rel_err:.4%} "
              f"> threshold {cfg.mc.threshold:.4%}", file=sys.stderr)
        return 4
    print(f"validation gate passed: max rel err {report.max_rel_err:.4%} "
          f"<= threshold {cfg.mc.threshold:.4%}")
    return 0


def run_optimize(cfg: SystemConfig, out: str, seed: int, threads: int,
                 timing: bool) -> int:
    try:
        res = optimize_frames(cfg, optimize_w=True, threads=threads)
    except NoConvergence as exc:
        print(f"solver failure during optimization: {exc}", file=sys.stderr)
        return 3
    rows = []
    for i, cand in enumerate(res.candidates):
        rows.append([str(i), _fmt_q(cand.q), str(len(cand.q)), _fmt(cand.sse),
                     str(cand.fp_iterations), str(int(i == res.best_index)),
                     _fmt_w(cand.w)])
    _write_csv(out, cfg, seed, OPTIMIZE_HEADER, rows)
    print(f"best schedule q={_fmt_q(res.schedule.q)} M={res.schedule.num_frames} "
          f"sse={res.sse:.6f}")
    print(f"wrote {len(rows)} candidate rows to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agingmimo",
        description="Deterministic sum-SE experiments for aging uplink MIMO")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (("sweep", "SSE across one config axis"),
                      ("validate", "Monte Carlo check of deterministic SE"),
                      ("optimize", "joint frame/beamformer search")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="YAML config path")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (default: mc.seed from the config)")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker count (default: ${THREADS_ENV} or cpu count)")
        p.add_argument("--timing", action="store_true",
                       help="record wall-clock runtime_ms (breaks byte determinism)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        threads = resolve_threads(args.threads)
        seed = args.seed if args.seed is not None else cfg.mc.seed
        runner = {"sweep": run_sweep, "validate": run_validate,
                  "optimize": run_optimize}[args.command]
        return runner(cfg, args.out, seed, threads, args.timing)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NoConvergence as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
