"""Per-player regret minimizers.

All minimizers follow the same two-call protocol: ``decide()`` returns the
next decision, then ``observe(f, weight)`` feeds the loss vector for that
decision together with its payoff weight (ignored by the step-size methods).
Losses are always minimized; a maximizing player is handled by the caller
feeding ``-g``.
"""
from __future__ import annotations

import math

import numpy as np

from .geometry import (
    Ball,
    BallHyperplane,
    ConeGeometry,
    L1Ball,
    L2Ball,
    LInfBall,
    Simplex,
    project_simplex,
)

PROX_TOL = 1e-3


# ---------------------------------------------------------------------------
# step sizes
# ---------------------------------------------------------------------------

def theoretical_step_size(diameter: float, loss_bound: float, horizon: int) -> float:
    """``sqrt(2) * Omega / (L * sqrt(T))``."""
    if not (diameter > 0 and loss_bound > 0 and horizon > 0):
        raise ValueError("diameter, loss bound and horizon must all be positive")
    return math.sqrt(2.0) * diameter / (loss_bound * math.sqrt(horizon))


class FixedStep:
    def __init__(self, eta: float):
        if not eta > 0:
            raise ValueError(f"step size must be positive, got {eta}")
        self.eta = float(eta)

    def record(self, loss_norm: float) -> float:
        return self.eta

    def current(self) -> float:
        return self.eta

    def __repr__(self):
        return f"FixedStep({self.eta:g})"


class AdaptiveStep:
    """``eta = 1 / sqrt(sum of squared loss norms observed so far)``.

    Before any nonzero loss has been seen, ``eta0`` is used.
    """

    def __init__(self, eta0: float = 1.0):
        if not eta0 > 0:
            raise ValueError(f"initial step size must be positive, got {eta0}")
        self.eta0 = float(eta0)
        self.squared_norm_sum = 0.0

    def record(self, loss_norm: float) -> float:
        return adaptive_step_size(self, loss_norm)

    def current(self) -> float:
        if self.squared_norm_sum <= 0.0:
            return self.eta0
        return 1.0 / math.sqrt(self.squared_norm_sum)

    def __repr__(self):
        return f"AdaptiveStep(eta0={self.eta0:g})"


def adaptive_step_size(state: AdaptiveStep, new_loss_norm: float) -> float:
    if new_loss_norm < 0:
        raise ValueError("loss norm cannot be negative")
    state.squared_norm_sum += float(new_loss_norm) ** 2
    return state.current()


# ---------------------------------------------------------------------------
# prox operators
# ---------------------------------------------------------------------------

def prox_ball(center, radius: float, anchor, c, eta: float) -> np.ndarray:
    """argmin over ``||x - center|| <= radius`` of ``<c, x> + ||x - anchor||^2 / (2 eta)``."""
    if not radius > 0 or not eta > 0:
        raise ValueError("radius and step size must be positive")
    center = np.asarray(center, dtype=float)
    d = np.asarray(anchor, dtype=float) - eta * np.asarray(c, dtype=float) - center
    return center + radius * d / max(radius, float(np.linalg.norm(d)))


def prox_ball_simplex(center, radius: float, anchor, c, eta: float,
                      tol: float = PROX_TOL, max_iter: int = 200) -> np.ndarray:
    """Prox step over ``{y in simplex : ||y - center|| <= radius}``.

    The ball constraint is dualized with a multiplier ``mu >= 0``. For fixed
    ``mu`` the inner problem is a simplex projection of
    ``eta / (eta*mu + 1) * (anchor/eta + mu*center - c)``, and the concave dual
    ``q(mu)`` is maximized by bisection on its derivative over ``[0, mu_bar]``.

    The bisection stops once the two inner projection targets are within
    ``tol`` of each other; since the projection is nonexpansive and the target
    moves along a segment, the returned point is within ``tol`` of the exact
    prox point. The upper end of the bracket is returned, so the result always
    satisfies the ball constraint.
    """
    if not radius > 0 or not eta > 0 or not tol > 0:
        raise ValueError("radius, step size and tolerance must be positive")
    y0 = np.asarray(center, dtype=float)
    yp = np.asarray(anchor, dtype=float)
    c = np.asarray(c, dtype=float)
    if y0.min() < -1e-9 or abs(y0.sum() - 1.0) > 1e-9:
        raise ValueError("center must lie in the simplex")

    def target(mu):
        return (eta / (eta * mu + 1.0)) * (yp / eta + mu * y0 - c)

    def y_of(mu):
        return project_simplex(target(mu))

    def q(mu, y):
        return (-0.5 * radius ** 2 * mu + c @ y
                + (y - yp) @ (y - yp) / (2 * eta) + 0.5 * mu * (y - y0) @ (y - y0))

    r2 = radius * radius
    y = y_of(0.0)
    if (y - y0) @ (y - y0) <= r2:
        return y
    mu_bar = 2.0 / r2 * (c @ y0 + (y0 - yp) @ (y0 - yp) / (2 * eta) - q(0.0, y))
    lo, hi = 0.0, max(mu_bar, 1e-12)
    y_hi = y_of(hi)
    # guard against rounding in mu_bar: make sure the bracket holds the root
    while (y_hi - y0) @ (y_hi - y0) > r2:
        lo, hi = hi, 2.0 * hi
        y_hi = y_of(hi)
    y_lo = y
    for _ in range(max_iter):
        if np.linalg.norm(target(lo) - target(hi)) <= tol:
            break
        mid = 0.5 * (lo + hi)
        y_mid = y_of(mid)
        if (y_mid - y0) @ (y_mid - y0) > r2:
            lo, y_lo = mid, y_mid
        else:
            hi, y_hi = mid, y_mid
    # one secant step on the constraint residual; a feasible result lies
    # between the root and hi, hence at least as close as y_hi
    d_lo = (y_lo - y0) @ (y_lo - y0) - r2
    d_hi = (y_hi - y0) @ (y_hi - y0) - r2
    if d_lo > d_hi:
        mid = lo + (hi - lo) * d_lo / (d_lo - d_hi)
        y_mid = y_of(mid)
        if (y_mid - y0) @ (y_mid - y0) <= r2:
            return y_mid
    return y_hi


def _project_l1(v: np.ndarray) -> np.ndarray:
    if np.abs(v).sum() <= 1.0:
        return v.copy()
    return np.sign(v) * project_simplex(np.abs(v)) if v.size else v


def prox_step(domain: ConeGeometry, anchor, c, eta: float) -> np.ndarray:
    """Euclidean prox over a decision set: project ``anchor - eta * c``."""
    if not eta > 0:
        raise ValueError(f"step size must be positive, got {eta}")
    anchor = np.asarray(anchor, dtype=float)
    c = np.asarray(c, dtype=float)
    if isinstance(domain, BallHyperplane):
        return prox_ball_simplex(domain.center, domain.radius, anchor, c, eta)
    if isinstance(domain, Ball):
        return prox_ball(domain.center, domain.radius, anchor, c, eta)
    if isinstance(domain, L2Ball):
        return prox_ball(np.zeros(domain.n), 1.0, anchor, c, eta)
    if isinstance(domain, Simplex):
        return project_simplex(anchor - eta * c)
    if isinstance(domain, L1Ball):
        return _project_l1(anchor - eta * c)
    if isinstance(domain, LInfBall):
        return np.clip(anchor - eta * c, -1.0, 1.0)
    raise TypeError(f"no prox operator for {domain!r}")


def omd_step(domain, x, f, eta) -> np.ndarray:
    return prox_step(domain, x, f, eta)


def ftrl_step(domain, cumulative, eta) -> np.ndarray:
    if not eta > 0:
        raise ValueError(f"step size must be positive, got {eta}")
    # <G, x> + ||x||^2 / eta is ||x + eta G / 2||^2 / eta up to a constant
    return prox_step(domain, -0.5 * eta * np.asarray(cumulative, dtype=float),
                     np.zeros(domain.dim), 1.0)


def optimistic_ftrl_step(domain, cumulative, predictor, eta) -> np.ndarray:
    return ftrl_step(domain, np.asarray(cumulative) + np.asarray(predictor), eta)


def optimistic_omd_step(domain, x, predictor, f, eta):
    """Both O-OMD prox steps from anchor ``x``: returns ``(z, x_next)``."""
    return prox_step(domain, x, predictor, eta), prox_step(domain, x, f, eta)


# ---------------------------------------------------------------------------
# minimizers
# ---------------------------------------------------------------------------

class RegretMinimizer:
    name = "abstract"

    def __init__(self, domain: ConeGeometry):
        self.domain = domain
        self.t = 0
        self.last_decision: np.ndarray | None = None

    def decide(self) -> np.ndarray:
        raise NotImplementedError

    def observe(self, f, weight: float = 1.0) -> None:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.domain!r})"


class CBA(RegretMinimizer):
    """Conic Blackwell algorithm; ``plus=True`` gives CBA+.

    The aggregate payoff ``u`` lives in the lifted space over the domain's
    reduced coordinates. CBA+ keeps ``u`` projected onto the cone after every
    update; plain CBA keeps the raw weighted average and projects only when
    choosing.
    """

    def __init__(self, domain, plus=True, initial=None):
        super().__init__(domain)
        self.plus = plus
        self.name = "cba+" if plus else "cba"
        self.initial = domain.initial() if initial is None else np.asarray(initial, dtype=float)
        self.aggregate = np.zeros(domain.n + 1)
        self.weight_sum = 0.0
        self._s = self.initial.copy()

    def choose(self) -> np.ndarray:
        """Decision in reduced coordinates from the current aggregate."""
        u = self.aggregate
        if not self.plus:
            u = self.domain._cone_part(u)
        return self.domain.decision(u, self.initial)

    def update(self, s, f_reduced, weight: float) -> None:
        if not weight > 0:
            raise ValueError(f"payoff weight must be positive, got {weight}")
        geom = self.domain
        v = np.empty(geom.n + 1)
        v[0] = (f_reduced @ s) / geom.kappa
        v[1:] = -f_reduced
        total = self.weight_sum + weight
        u = (self.weight_sum / total) * self.aggregate + (weight / total) * v
        self.aggregate = geom._cone_part(u) if self.plus else u
        self.weight_sum = total

    def decide(self):
        if self.t > 0:
            self._s = self.choose()
        self.last_decision = self.domain.to_point(self._s)
        return self.last_decision

    def observe(self, f, weight=1.0):
        f = np.asarray(f, dtype=float)
        if f.shape != (self.domain.dim,):
            raise ValueError("loss has the wrong dimension")
        self.t += 1
        self.update(self._s, self.domain.reduce_loss(f), weight)


def cba_choose(state: CBA) -> np.ndarray:
    return state.domain.to_point(state.choose())


def cba_update(state: CBA, x, f, weight: float) -> CBA:
    """Fold loss ``f`` at reduced decision ``x`` into the aggregate payoff."""
    state.update(np.asarray(x, dtype=float), np.asarray(f, dtype=float), weight)
    return state


class RegretMatching(RegretMinimizer):
    """Regret matching on the simplex; ``plus=True`` gives RM+."""

    def __init__(self, domain, plus=True, fallback=None):
        if not isinstance(domain, Simplex):
            raise TypeError("regret matching is only defined on the simplex")
        super().__init__(domain)
        self.plus = plus
        self.name = "rm+" if plus else "rm"
        self.regret = np.zeros(domain.n)
        self.fallback = domain.initial() if fallback is None else np.asarray(fallback, dtype=float)

    def choose(self) -> np.ndarray:
        return rm_choose(self.regret, self.fallback)

    def decide(self):
        self.last_decision = self.choose()
        return self.last_decision

    def observe(self, f, weight=1.0):
        self.t += 1
        self.regret = rm_update(self.regret, self.last_decision, f, self.plus, weight)


def rm_choose(regret, fallback=None) -> np.ndarray:
    pos = np.maximum(regret, 0.0)
    total = pos.sum()
    if total > 0.0:
        return pos / total
    if fallback is None:
        return np.full(len(regret), 1.0 / len(regret))
    return np.array(fallback, dtype=float)


def rm_update(regret, x, f, plus=True, weight=1.0) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != np.shape(regret) or np.shape(x) != f.shape:
        raise ValueError("dimension mismatch between regret, decision and loss")
    r = regret + weight * ((f @ x) - f)
    return np.maximum(r, 0.0) if plus else r


class _Proximal(RegretMinimizer):
    def __init__(self, domain, step=None, initial=None):
        super().__init__(domain)
        self.step = AdaptiveStep() if step is None else step
        start = domain.initial() if initial is None else np.asarray(initial, dtype=float)
        self.x = domain.to_point(start)

    def _eta(self, f) -> float:
        return self.step.record(float(np.linalg.norm(f)))


class OMD(_Proximal):
    name = "omd"

    def decide(self):
        self.last_decision = self.x
        return self.x

    def observe(self, f, weight=1.0):
        f = np.asarray(f, dtype=float)
        self.t += 1
        self.x = omd_step(self.domain, self.x, f, self._eta(f))


class FTRL(_Proximal):
    name = "ftrl"

    def __init__(self, domain, step=None, initial=None):
        super().__init__(domain, step, initial)
        self.cumulative = np.zeros(domain.dim)

    def decide(self):
        self.last_decision = self.x
        return self.x

    def observe(self, f, weight=1.0):
        f = np.asarray(f, dtype=float)
        self.t += 1
        self.cumulative = self.cumulative + f
        self.x = ftrl_step(self.domain, self.cumulative, self._eta(f))


class OptimisticFTRL(FTRL):
    """FTRL with the last observed loss added as a prediction of the next."""

    name = "oftrl"

    def observe(self, f, weight=1.0):
        f = np.asarray(f, dtype=float)
        self.t += 1
        self.cumulative = self.cumulative + f
        self.x = optimistic_ftrl_step(self.domain, self.cumulative, f, self._eta(f))


class OptimisticOMD(_Proximal):
    """Optimistic OMD: play ``z`` from the anchor with the predicted loss, then
    move the anchor with the observed loss."""

    name = "oomd"

    def __init__(self, domain, step=None, initial=None):
        super().__init__(domain, step, initial)
        self.predictor = np.zeros(domain.dim)

    def decide(self):
        if self.t == 0:
            z = self.x
        else:
            z = prox_step(self.domain, self.x, self.predictor, self.step.current())
        self.last_decision = z
        return z

    def observe(self, f, weight=1.0):
        f = np.asarray(f, dtype=float)
        self.t += 1
        self.x = omd_step(self.domain, self.x, f, self._eta(f))
        self.predictor = f


ALGORITHMS = {
    "cba": lambda d, **kw: CBA(d, plus=False, **kw),
    "cba+": lambda d, **kw: CBA(d, plus=True, **kw),
    "rm": lambda d, **kw: RegretMatching(d, plus=False, **kw),
    "rm+": lambda d, **kw: RegretMatching(d, plus=True, **kw),
    "omd": OMD,
    "ftrl": FTRL,
    "oomd": OptimisticOMD,
    "oftrl": OptimisticFTRL,
}

PARAMETER_FREE = {"cba", "cba+", "rm", "rm+"}


def make_minimizer(name: str, domain, step=None):
    try:
        factory = ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; expected one of {sorted(ALGORITHMS)}") from None
    if name in PARAMETER_FREE:
        return factory(domain)
    return factory(domain, step=step)
