"""Saddle problems: bilinear matrix games and distributionally robust logistic regression.

A problem exposes ``x_domain``, ``y_domain``, the two subgradient oracles
``x_subgradient(x, y)`` (for the minimizing player) and
``y_subgradient(x, y)`` (for the maximizing player), and ``metric(x_bar, y_bar)``.
"""
from __future__ import annotations

import warnings

import numpy as np

from .geometry import Ball, BallHyperplane, Simplex


class ContainmentWarning(UserWarning):
    """The ball-in-hyperplane ambiguity set reaches outside the simplex."""


class MatrixGame:
    """``min_x max_y <x, A y>`` over two simplexes."""

    def __init__(self, payoff):
        A = np.asarray(payoff, dtype=float)
        if A.ndim != 2 or A.size == 0:
            raise ValueError("payoff matrix must be a nonempty 2-d array")
        if not np.all(np.isfinite(A)):
            raise ValueError("payoff matrix has non-finite entries")
        self.payoff = A
        self.n, self.m = A.shape
        self.x_domain = Simplex(self.n)
        self.y_domain = Simplex(self.m)

    def x_subgradient(self, x, y):
        return self.payoff @ y

    def y_subgradient(self, x, y):
        return self.payoff.T @ x

    def value(self, x, y) -> float:
        return float(x @ self.payoff @ y)

    def metric(self, x_bar, y_bar) -> float:
        return matrix_duality_gap(self, x_bar, y_bar)

    def bounds(self):
        """``(L_x, L_y, Omega_x, Omega_y)``: loss-norm bounds and diameters."""
        L_x = float(np.linalg.norm(self.payoff, axis=0).max())
        L_y = float(np.linalg.norm(self.payoff, axis=1).max())
        return L_x, L_y, self.x_domain.diameter, self.y_domain.diameter


def matrix_gradients(game: MatrixGame, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (game.n,) or y.shape != (game.m,):
        raise ValueError(f"expected x of length {game.n} and y of length {game.m}")
    return game.payoff @ y, game.payoff.T @ x


def matrix_duality_gap(game: MatrixGame, x_bar, y_bar, tol: float = 1e-6) -> float:
    x_bar = np.asarray(x_bar, dtype=float)
    y_bar = np.asarray(y_bar, dtype=float)
    if not (game.x_domain.contains(x_bar, tol) and game.y_domain.contains(y_bar, tol)):
        raise ValueError("duality gap needs points of the simplexes")
    return float(np.max(game.payoff.T @ x_bar) - np.min(game.payoff @ y_bar))


class DroInstance:
    """Worst-case reweighted logistic loss.

    ``min_{||x - x0|| <= R} max_{y in Y} sum_i y_i log(1 + exp(-b_i a_i^T x))``
    with ``Y = {y : sum(y) = 1, ||y - y0||^2 <= lam}``. The default
    ``lam = 1 / (2m)`` and ``y0`` uniform. For ``m`` beyond a handful the set
    ``Y`` pokes out of the simplex; a ``ContainmentWarning`` is issued then.
    """

    def __init__(self, features, labels, radius=10.0, lam=None, x_center=None,
                 y_center=None, warn=True):
        a = np.asarray(features, dtype=float)
        b = np.asarray(labels, dtype=float)
        if a.ndim != 2 or a.size == 0:
            raise ValueError("features must be a nonempty 2-d array")
        if b.shape != (a.shape[0],):
            raise ValueError("need one label per sample")
        if not np.all(np.abs(b) == 1.0):
            raise ValueError("labels must be -1 or +1")
        if not np.all(np.isfinite(a)):
            raise ValueError("features have non-finite entries")
        self.features = a
        self.labels = b
        self.m, self.n = a.shape
        if self.m < 2:
            raise ValueError("need at least two samples")
        self.lam = 1.0 / (2 * self.m) if lam is None else float(lam)
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        self.radius = float(radius)
        self.x_domain = Ball(self.n, x_center, self.radius)
        y_center = None if y_center is None else np.asarray(y_center, dtype=float)
        if y_center is not None and y_center.min() < 0:
            raise ValueError("y center must lie in the simplex")
        self.y_domain = BallHyperplane(self.m, y_center, np.sqrt(self.lam))
        self.y_radius = self.y_domain.radius
        # rows b_i * a_i, reused by every oracle call
        self._signed = b[:, None] * a
        if warn and not self.y_domain.inside_simplex():
            warnings.warn(
                f"ambiguity set with radius {self.y_radius:.4g} around the center "
                "is not contained in the simplex; using the ball-hyperplane set as is",
                ContainmentWarning, stacklevel=2)

    def losses(self, x):
        return dro_losses(self, x)

    def x_subgradient(self, x, y):
        margins = self._signed @ x
        # -b_i / (1 + exp(b_i a_i^T x)), written to avoid overflow
        coef = -0.5 * (1.0 - np.tanh(0.5 * margins))
        return (y * coef) @ self._signed

    def y_subgradient(self, x, y):
        return np.logaddexp(0.0, -(self._signed @ x))

    def metric(self, x_bar, y_bar=None) -> float:
        return dro_worst_case_loss(self, x_bar)

    def bounds(self):
        return dro_bounds(self, self.radius)


def dro_losses(inst: DroInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,) or not np.all(np.isfinite(x)):
        raise ValueError("x must be a finite vector of the feature dimension")
    return np.logaddexp(0.0, -(inst._signed @ x))


def dro_x_subgradient(inst: DroInstance, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (inst.n,) or y.shape != (inst.m,):
        raise ValueError(f"expected x of length {inst.n} and y of length {inst.m}")
    return inst.x_subgradient(x, y)


def dro_worst_case_loss(inst: DroInstance, x) -> float:
    """Closed-form ``max_{y in Y} <loss(x), y>``."""
    loss = dro_losses(inst, x)
    return float(inst.y_domain.center @ loss) + inst.y_radius * float(
        np.linalg.norm(inst.y_domain.basis.T @ loss))


def dro_bounds(inst: DroInstance, radius: float):
    """``(L_x, L_y, Omega_x, Omega_y)`` for step-size calibration."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    row_norms = np.linalg.norm(inst.features, axis=1)
    L_y = float(np.sqrt(np.sum(np.logaddexp(0.0, radius * row_norms) ** 2)))
    L_x = float(np.linalg.norm(inst._signed))
    return L_x, L_y, 2.0 * radius, 2.0 * inst.y_radius
