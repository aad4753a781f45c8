"""Self-play loop for saddle problems.

The minimizing player sees ``f = x_subgradient(x, y)``; the maximizing player
is driven as a minimizer of ``-g`` with ``g = y_subgradient(x, y)``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

MODES = ("simultaneous", "alternation")
MAX_EXPONENT = 2


@dataclass(frozen=True)
class AveragingScheme:
    """Decision weights ``t ** decision_exponent`` for the reported average and
    payoff weights ``t ** payoff_exponent`` fed to the minimizers."""

    decision_exponent: int = 0
    payoff_exponent: int = 0

    def __post_init__(self):
        for value in (self.decision_exponent, self.payoff_exponent):
            if int(value) != value or not 0 <= value <= MAX_EXPONENT:
                raise ValueError(f"weight exponents must be integers in [0, {MAX_EXPONENT}], got {value}")


SCHEMES = {
    "uniform": AveragingScheme(0, 0),
    "linear": AveragingScheme(1, 0),
    "linear-both": AveragingScheme(1, 1),
    "quadratic": AveragingScheme(2, 0),
}


@dataclass
class Checkpoint:
    iteration: int
    metric: float
    x_avg: np.ndarray
    y_avg: np.ndarray
    elapsed: float


@dataclass
class History:
    """Per-player decisions and the losses each player was charged for them."""

    x_decisions: list = field(default_factory=list)
    x_losses: list = field(default_factory=list)
    y_decisions: list = field(default_factory=list)
    y_losses: list = field(default_factory=list)


@dataclass
class RunRecord:
    checkpoints: list
    config: dict
    history: History | None = None

    @property
    def iterations(self):
        return [c.iteration for c in self.checkpoints]

    @property
    def metrics(self):
        return [c.metric for c in self.checkpoints]


class DivergenceError(FloatingPointError):
    """An oracle produced a non-finite vector; ``record`` holds the checkpoints so far."""

    def __init__(self, message, record):
        super().__init__(message)
        self.record = record


def default_checkpoints(T: int) -> list[int]:
    """Powers of two up to ``T``, plus ``T`` itself."""
    if T < 1:
        raise ValueError("horizon must be at least 1")
    points = [1 << k for k in range(T.bit_length()) if (1 << k) <= T]
    if points[-1] != T:
        points.append(T)
    return points


def _as_vector(value, size, who):
    v = np.asarray(value, dtype=float)
    if v.shape != (size,):
        raise ValueError(f"{who} returned shape {v.shape}, expected ({size},)")
    if not np.all(np.isfinite(v)):
        return None
    return v


def run(problem, algo_x, algo_y, T: int, scheme: AveragingScheme = SCHEMES["uniform"],
        mode: str = "simultaneous", checkpoints=None, record_history: bool = False) -> RunRecord:
    """Play ``T`` rounds and record ``problem.metric`` of the weighted averages.

    In alternation mode round ``t >= 2`` goes: x decides; y is charged for its
    previous decision against the fresh x and updates; y decides; x is charged
    against the fresh y. The final y decision is never charged.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if int(T) != T or T < 1:
        raise ValueError("horizon must be a positive integer")
    T = int(T)
    dx, dy = problem.x_domain.dim, problem.y_domain.dim
    if algo_x.domain.dim != dx or algo_y.domain.dim != dy:
        raise ValueError("minimizer decision sets do not match the problem")
    marks = default_checkpoints(T) if checkpoints is None else sorted(set(int(c) for c in checkpoints))
    if not marks or marks[0] < 1 or marks[-1] > T:
        raise ValueError("checkpoints must lie in [1, T]")
    p, q = scheme.decision_exponent, scheme.payoff_exponent

    config = {"x_algorithm": getattr(algo_x, "name", type(algo_x).__name__),
              "y_algorithm": getattr(algo_y, "name", type(algo_y).__name__),
              "T": T, "mode": mode,
              "decision_exponent": p, "payoff_exponent": q}
    record = RunRecord([], config, History() if record_history else None)
    hist = record.history

    x_sum = np.zeros(dx)
    y_sum = np.zeros(dy)
    weight_total = 0.0
    next_mark = 0
    y_prev = None
    start = time.perf_counter()

    def diverged(t, who):
        raise DivergenceError(f"{who} oracle returned a non-finite vector at round {t}", record)

    for t in range(1, T + 1):
        x = algo_x.decide()
        if mode == "simultaneous":
            y = algo_y.decide()
            f = _as_vector(problem.x_subgradient(x, y), dx, "x oracle")
            g = _as_vector(problem.y_subgradient(x, y), dy, "y oracle")
            if f is None or g is None:
                diverged(t, "x" if f is None else "y")
            algo_x.observe(f, float(t) ** q)
            algo_y.observe(-g, float(t) ** q)
            if hist is not None:
                hist.y_decisions.append(y)
                hist.y_losses.append(-g)
        else:
            if t > 1:
                g = _as_vector(problem.y_subgradient(x, y_prev), dy, "y oracle")
                if g is None:
                    diverged(t, "y")
                algo_y.observe(-g, float(t - 1) ** q)
                if hist is not None:
                    hist.y_decisions.append(y_prev)
                    hist.y_losses.append(-g)
            y = algo_y.decide()
            f = _as_vector(problem.x_subgradient(x, y), dx, "x oracle")
            if f is None:
                diverged(t, "x")
            algo_x.observe(f, float(t) ** q)
            y_prev = y
        if hist is not None:
            hist.x_decisions.append(x)
            hist.x_losses.append(f)

        w = float(t) ** p
        x_sum += w * x
        y_sum += w * y
        weight_total += w
        if t == marks[next_mark]:
            x_avg = x_sum / weight_total
            y_avg = y_sum / weight_total
            record.checkpoints.append(Checkpoint(
                t, float(problem.metric(x_avg, y_avg)), x_avg, y_avg,
                time.perf_counter() - start))
            next_mark += 1
            if next_mark == len(marks):
                break
    return record


def weighted_average(iterates, exponent: int = 0) -> np.ndarray:
    """``sum_t t^p x_t / sum_t t^p`` with ``t`` starting at 1."""
    X = np.asarray(iterates, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a nonempty sequence of iterates")
    w = np.arange(1, X.shape[0] + 1, dtype=float) ** exponent
    return (w / w.sum()) @ X


def regret_to_date(loss_history, decision_history, weights, domain) -> float:
    """``sum_t w_t <f_t, x_t> - min_{x in X} sum_t w_t <f_t, x>``."""
    F = np.asarray(loss_history, dtype=float)
    X = np.asarray(decision_history, dtype=float)
    w = np.asarray(weights, dtype=float)
    if F.ndim != 2 or F.shape != X.shape or w.shape != (F.shape[0],):
        raise ValueError("loss, decision and weight histories are misaligned")
    played = float(w @ np.einsum("ij,ij->i", F, X))
    return played - domain.linear_min(w @ F)
