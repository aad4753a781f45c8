"""Command-line experiment runner.

    cbasolve matrix-game --algo cba+ --steps 2000 --instances 70 --out gaps.csv
    cbasolve dro --algo omd --step-mode multiplier:100 --summary dro.json
    cbasolve describe --problem dro --n 50 --m 50
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import data_io
from .framework import MODES, SCHEMES, DivergenceError, default_checkpoints, run
from .minimizers import (
    ALGORITHMS,
    PARAMETER_FREE,
    AdaptiveStep,
    FixedStep,
    make_minimizer,
    theoretical_step_size,
)
from .problems import ContainmentWarning, DroInstance, MatrixGame

CSV_HEADER = ["instance", "algorithm", "iteration", "metric", "elapsed_s"]
DIVERGENCE_GUARD = 1e12
DIVERGED = "diverged"
EXIT_CONFIG = 2
EXIT_IO = 3
PROBLEMS = ("matrix-game", "dro")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: str = "matrix-game"
    algo: str = "cba+"
    steps: int = 1000
    instances: int = 1
    seed: int = 0
    mode: str = "alternation"
    averaging: str = "linear"
    step_mode: str | None = None
    alpha: float | None = None
    n: int = 10
    m: int = 10
    dist: str | None = None
    data: str | None = None
    radius: float = 10.0
    lam: float | None = None
    flip: float = 0.1
    out: str | None = None
    summary: str | None = None
    workers: int | None = None

    def resolved(self) -> "ExperimentConfig":
        """Validate and fill problem-dependent defaults; returns a new config."""
        c = ExperimentConfig(**asdict(self))
        if c.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got {c.problem!r}")
        if c.algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {c.algo!r}; choose from {sorted(ALGORITHMS)}")
        if c.problem == "dro" and c.algo in ("rm", "rm+"):
            raise ConfigError("regret matching needs simplex decision sets; not available for dro")
        if c.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {c.mode!r}")
        if c.averaging not in SCHEMES:
            raise ConfigError(f"averaging must be one of {sorted(SCHEMES)}, got {c.averaging!r}")
        for name in ("steps", "instances", "n", "m"):
            if int(getattr(c, name)) != getattr(c, name) or getattr(c, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if c.problem == "dro" and c.data is None and c.m < 2:
            raise ConfigError("dro needs m >= 2 samples")
        if c.workers is not None and c.workers < 1:
            raise ConfigError("workers must be positive")
        if not c.radius > 0:
            raise ConfigError("radius must be positive")
        if c.lam is not None and not c.lam > 0:
            raise ConfigError("lambda must be positive")
        if not 0.0 <= c.flip <= 1.0:
            raise ConfigError("flip must be in [0, 1]")
        if c.dist is None:
            c.dist = "uniform01" if c.problem == "matrix-game" else "normal"
        allowed = ("uniform01", "normal01") if c.problem == "matrix-game" else ("normal", "uniform")
        if c.dist not in allowed:
            raise ConfigError(f"dist for {c.problem} must be one of {allowed}, got {c.dist!r}")
        if c.step_mode is None:
            if c.alpha is not None:
                c.step_mode = f"multiplier:{c.alpha!r}"
            else:
                c.step_mode = "adaptive" if c.problem == "matrix-game" else "theory"
        parse_step_mode(c.step_mode, c.alpha)
        return c


def parse_step_mode(text: str, alpha: float | None = None):
    """Returns ``(kind, value)`` with kind in {'theory', 'fixed', 'adaptive'}."""
    kind, _, arg = text.partition(":")
    try:
        if kind == "adaptive" and not arg:
            return "adaptive", None
        if kind == "theory" and not arg:
            return "theory", 1.0
        if kind == "multiplier":
            value = float(arg) if arg else (1.0 if alpha is None else float(alpha))
            if not value > 0 or not math.isfinite(value):
                raise ConfigError("multiplier must be positive")
            return "theory", value
        if kind == "fixed" and arg:
            value = float(arg)
            if not value > 0 or not math.isfinite(value):
                raise ConfigError("fixed step must be positive")
            return "fixed", value
    except ValueError as err:
        raise ConfigError(f"bad step mode {text!r}: {err}") from None
    raise ConfigError(f"bad step mode {text!r}; use theory, adaptive, fixed:<eta> or multiplier:<alpha>")


def build_problem(config: ExperimentConfig, instance: int, dataset=None):
    """Instance ``i`` is generated from seed ``config.seed + i``; a loaded
    dataset is shared by all instances."""
    seed = config.seed + instance
    if config.problem == "matrix-game":
        return MatrixGame(data_io.generate_matrix(config.n, config.m, config.dist, seed))
    data = dataset
    if data is None:
        data = data_io.generate_synthetic_dro(config.n, config.m, config.dist, config.flip, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContainmentWarning)
        return DroInstance(data.features, data.labels, config.radius, config.lam)


def step_sizes(problem, config: ExperimentConfig):
    """Theoretical step sizes ``(eta_x, eta_y)`` for the configured horizon."""
    L_x, L_y, omega_x, omega_y = problem.bounds()
    return (theoretical_step_size(omega_x, L_x, config.steps),
            theoretical_step_size(omega_y, L_y, config.steps))


def make_players(problem, config: ExperimentConfig):
    kind, value = parse_step_mode(config.step_mode, config.alpha)
    steps = (None, None)
    if config.algo not in PARAMETER_FREE:
        if kind == "adaptive":
            steps = (AdaptiveStep(), AdaptiveStep())
        elif kind == "fixed":
            steps = (FixedStep(value), FixedStep(value))
        else:
            try:
                eta_x, eta_y = step_sizes(problem, config)
            except ValueError as err:
                raise ConfigError(f"cannot compute theoretical step size: {err}") from None
            steps = (FixedStep(value * eta_x), FixedStep(value * eta_y))
    return (make_minimizer(config.algo, problem.x_domain, steps[0]),
            make_minimizer(config.algo, problem.y_domain, steps[1]))


def load_dataset(config: ExperimentConfig):
    if config.problem != "dro" or config.data is None:
        return None
    data = data_io.load_libsvm(config.data)
    if data.features.shape[0] < 2:
        raise ConfigError("dro needs at least two samples in the dataset")
    return data


def guarded(value: float) -> float | None:
    """``None`` when the metric is non-finite or beyond the divergence guard."""
    if not math.isfinite(value) or abs(value) > DIVERGENCE_GUARD:
        return None
    return float(value)


def run_instance(config: ExperimentConfig, instance: int, dataset=None):
    """Rows ``(iteration, metric or None, elapsed)``; ``None`` marks divergence."""
    problem = build_problem(config, instance, dataset)
    algo_x, algo_y = make_players(problem, config)
    marks = default_checkpoints(config.steps)
    try:
        record = run(problem, algo_x, algo_y, config.steps, SCHEMES[config.averaging],
                     config.mode, marks)
        partial = False
    except DivergenceError as err:
        record = err.record
        partial = True
    rows = []
    for cp in record.checkpoints:
        rows.append((cp.iteration, guarded(cp.metric), cp.elapsed))
    if partial:
        last = rows[-1][2] if rows else 0.0
        rows += [(t, None, last) for t in marks[len(rows):]]
    return rows


def _run_star(args):
    return run_instance(*args)


def run_experiment(config: ExperimentConfig):
    """All instances in order; returns ``(csv_rows, summary_dict)``."""
    config = config.resolved()
    dataset = load_dataset(config)
    jobs = [(config, i, dataset) for i in range(config.instances)]
    workers = config.workers or os.cpu_count() or 1
    workers = min(workers, config.instances)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_star, jobs))
    else:
        results = [_run_star(job) for job in jobs]

    csv_rows = []
    for i, rows in enumerate(results):
        for t, metric, elapsed in rows:
            csv_rows.append([i, config.algo, t, DIVERGED if metric is None else repr(metric),
                             f"{elapsed:.6f}"])
    return csv_rows, summarize(config, results)


def summarize(config: ExperimentConfig, results) -> dict:
    per_checkpoint = []
    for k, (t, _, _) in enumerate(results[0]):
        values = np.array([rows[k][1] for rows in results if rows[k][1] is not None], dtype=float)
        entry = {"iteration": t, "instances": len(values),
                 "diverged": len(results) - len(values)}
        if len(values):
            entry["geometric_mean"] = (float(np.exp(np.mean(np.log(values))))
                                       if np.all(values > 0) else 0.0)
            entry["arithmetic_mean"] = float(values.mean())
            entry["median"] = float(np.median(values))
        per_checkpoint.append(entry)
    return {"config": asdict(config), "checkpoints": per_checkpoint}


def describe(config: ExperimentConfig) -> str:
    config = config.resolved()
    problem = build_problem(config, 0, load_dataset(config))
    L_x, L_y, omega_x, omega_y = problem.bounds()
    lines = [f"problem: {config.problem}"]
    if config.problem == "matrix-game":
        lines.append(f"payoff matrix: {problem.n} x {problem.m} ({config.dist}, seed {config.seed})")
    else:
        source = config.data or f"synthetic {config.dist}"
        lines.append(f"dataset: {source}, m={problem.m} samples, n={problem.n} features")
        lines.append(f"x set: ball radius {problem.radius:g}; y set: hyperplane ball radius "
                     f"{problem.y_radius:.6g} (lambda {problem.lam:.6g})")
        lines.append(f"y set inside simplex: {problem.y_domain.inside_simplex()}")
    lines.append(f"kappa_x={problem.x_domain.kappa:.6g} kappa_y={problem.y_domain.kappa:.6g}")
    lines.append(f"Omega_x={omega_x:.6g} Omega_y={omega_y:.6g}")
    lines.append(f"L_x={L_x:.8g} L_y={L_y:.8g}")
    try:
        eta_x, eta_y = step_sizes(problem, config)
        lines.append(f"eta_th (T={config.steps}): x={eta_x:.6g} y={eta_y:.6g}")
    except ValueError as err:
        lines.append(f"eta_th unavailable: {err}")
    return "\n".join(lines)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with config keys; flags override it")
    p.add_argument("--algo")
    p.add_argument("--steps", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode")
    p.add_argument("--averaging")
    p.add_argument("--step-mode", dest="step_mode")
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--dist")
    p.add_argument("--data", help="libsvm file (dro only)")
    p.add_argument("--radius", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--flip", type=float)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--summary", help="JSON summary path")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbasolve", description="Saddle-point self-play experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PROBLEMS:
        _add_common(sub.add_parser(name, help=f"run {name} experiments"))
    p = sub.add_parser("describe", help="print resolved constants without running")
    p.add_argument("--problem", choices=PROBLEMS)
    _add_common(p)
    return parser


def config_from_args(args) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(ExperimentConfig)}
        for key, value in loaded.items():
            key = key.replace("-", "_")
            key = "lam" if key == "lambda" else key
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = value
    for f in fields(ExperimentConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    if args.command in PROBLEMS:
        values["problem"] = args.command
    elif args.problem is not None:
        values["problem"] = args.problem
    try:
        return ExperimentConfig(**values)
    except TypeError as err:
        raise ConfigError(str(err)) from None


def write_csv(rows, path):
    if path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if args.command == "describe":
            print(describe(config))
            return 0
        rows, summary = run_experiment(config)
        write_csv(rows, config.out)
        if config.summary:
            with open(config.summary, "w", encoding="utf-8") as fh:
                json.dump(summary, fh, indent=2)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, data_io.LibsvmError) as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
