"""Command-line runner: ``pqs run | oracle | bound | presets``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import PRESET_NAMES, ConfigError, ExperimentConfig, build_experiment, load_config
from .engine import decompose, estimate
from .errors import EvolutionError, ResourceLimitError
from .evolve import EvolverConfig
from .verify import ORACLE_MAX_QUBITS, choi_lower_bound, oracle_observables

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_NUMERIC = 0, 2, 3, 4

COLUMNS = ("t", "observable", "mean", "stderr", "imag_diag", "overhead_C", "n_samples")
ORACLE_COLUMNS = ("oracle_value", "abs_error")


def _oracle(cfg: ExperimentConfig, system, initial, observables) -> np.ndarray:
    return oracle_observables(
        system.reassemble(),
        system,
        initial,
        observables,
        cfg.grid,
        EvolverConfig(tolerance=cfg.tolerance),
        cfg.trotter_steps,
        cfg.T,
    )


def _rows(results, oracle, names, grid) -> list[dict]:
    col = {float(t): g for g, t in enumerate(grid)}
    rows = []
    for r in results:
        row = {
            "t": r.time,
            "observable": r.observable,
            "mean": r.mean,
            "stderr": r.stderr,
            "imag_diag": r.imag_diagnostic,
            "overhead_C": r.overhead_C,
            "n_samples": r.n_samples,
        }
        if oracle is not None:
            k = names.index(r.observable)
            g = col[r.time]
            row["oracle_value"] = float(oracle[k, g])
            row["abs_error"] = abs(r.mean - float(oracle[k, g]))
        rows.append(row)
    return rows


def _fmt(v) -> str:
    # repr gives the shortest string that round-trips
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def render_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def render_json(rows: list[dict]) -> str:
    return json.dumps(rows, indent=1) + "\n"


def run_experiment(cfg: ExperimentConfig, threads: int) -> tuple[list[dict], dict]:
    """Estimate (and optionally check against the oracle); returns rows and manifest."""
    system, initial, observables = build_experiment(cfg)
    if cfg.oracle and system.n_qubits > ORACLE_MAX_QUBITS:
        raise ResourceLimitError(f"oracle limited to {ORACLE_MAX_QUBITS} qubits, got {system.n_qubits}")
    decomp = decompose(system)
    t0 = time.perf_counter()
    results = estimate(
        system,
        initial,
        observables,
        cfg.T,
        cfg.grid,
        cfg.n_samples,
        cfg.seed,
        mode=cfg.mode,
        max_jumps=cfg.max_jumps,
        dyson_order=cfg.dyson_order,
        evolver=EvolverConfig(tolerance=cfg.tolerance),
        trotter_steps=cfg.trotter_steps,
        threads=threads,
    )
    est_wall = time.perf_counter() - t0
    names = [o.name for o in observables]
    oracle = None
    oracle_wall = None
    if cfg.oracle:
        t1 = time.perf_counter()
        oracle = _oracle(cfg, system, initial, observables)
        oracle_wall = time.perf_counter() - t1
    rows = _rows(results, oracle, names, cfg.grid)
    manifest = {
        "name": cfg.output_path,
        "config": cfg.raw,
        "seed": cfg.seed,
        "lambda_total": system.lambda_total,
        "overhead_C": decomp.overhead(cfg.T),
        "n_qubits": system.n_qubits,
        "n_interaction_terms": len(system.interactions),
        "wall_time_s": {"estimate": est_wall, "oracle": oracle_wall},
        "threads": threads,
        "versions": {
            "pqsim": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    return rows, manifest


def _write_outputs(cfg, rows, manifest, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = out_dir / cfg.output_path
    columns = COLUMNS + (ORACLE_COLUMNS if cfg.oracle else ())
    if cfg.output_format == "csv":
        table = stem.with_suffix(".csv")
        table.write_text(render_csv(rows, columns))
    else:
        table = stem.with_suffix(".results.json")
        table.write_text(render_json(rows))
    man = stem.with_suffix(".manifest.json")
    manifest = dict(manifest, table=table.name)
    man.write_text(json.dumps(manifest, indent=2) + "\n")
    return [table, man]


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    threads = args.threads or os.cpu_count() or 1
    rows, manifest = run_experiment(cfg, threads)
    paths = _write_outputs(cfg, rows, manifest, Path(args.out))
    for p in paths:
        print(p)
    worst = max((r.get("abs_error", 0.0) for r in rows), default=0.0)
    if cfg.oracle:
        print(f"max abs error vs oracle: {worst:.3g}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    system, initial, observables = build_experiment(cfg)
    vals = _oracle(cfg, system, initial, observables)
    rows = [
        {"t": float(t), "observable": o.name, "oracle_value": float(vals[k, g])}
        for g, t in enumerate(cfg.grid)
        for k, o in enumerate(observables)
    ]
    sys.stdout.write(render_csv(rows, ("t", "observable", "oracle_value")))
    return EXIT_OK


def cmd_bound(args) -> int:
    cfg = load_config(args.config)
    system, _, _ = build_experiment(cfg)
    rep = choi_lower_bound(system.interactions, system.subsystem_sizes)
    print(
        json.dumps(
            {
                "lower_bound": rep.lower_bound,
                "explicit_cost_rate": rep.explicit_cost_rate,
                "condition1": rep.condition1,
                "per_subsystem_norms": list(rep.per_subsystem_norms),
            },
            indent=2,
        )
    )
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in PRESET_NAMES:
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pqs", description="Partitioned-simulation experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="estimate observables (and compare with the oracle if enabled)")
    r.add_argument("config", help="TOML config, run manifest (.json) or preset name")
    r.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    r.add_argument("--out", default=".", help="output directory")
    r.set_defaults(func=cmd_run)
    o = sub.add_parser("oracle", help="exact full-register values only")
    o.add_argument("config")
    o.set_defaults(func=cmd_oracle)
    b = sub.add_parser("bound", help="cost lower bound for the config's interaction")
    b.add_argument("config")
    b.set_defaults(func=cmd_bound)
    s = sub.add_parser("presets", help="list built-in configs")
    s.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except EvolutionError as exc:
        print(f"evolution failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
