"""Lifted cones over decision sets and their exact orthogonal projections.

A lifted vector is a flat float array of length ``n + 1``: index 0 holds the
scalar coordinate (``tilde``) and indices ``1:`` hold the ``hat`` block. For a
decision set X with ``kappa = max ||x||_2`` the cone is
``C = cone({kappa} x X)`` and its polar is ``C° = {z : <z, c> <= 0 for c in C}``.

Every projection returns both parts of the Moreau decomposition
``u = pi_C(u) + pi_C°(u)``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

DEFAULT_TOL = 1e-9


class ProjectionPair(NamedTuple):
    onto_cone: np.ndarray
    onto_polar: np.ndarray


def lift(tilde: float, hat) -> np.ndarray:
    """Pack ``(tilde, hat)`` into a flat lifted vector."""
    hat = np.asarray(hat, dtype=float).ravel()
    out = np.empty(hat.size + 1)
    out[0] = tilde
    out[1:] = hat
    return out


def split(u: np.ndarray) -> tuple[float, np.ndarray]:
    return float(u[0]), u[1:]


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def project_simplex(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex.

    Sort-based, O(n log n). Ties are broken by index (stable sort), so the
    result is deterministic.
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("cannot project an empty vector onto the simplex")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite entries in vector")
    order = np.argsort(-v, kind="stable")
    s = v[order]
    css = np.cumsum(s) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.count_nonzero(s - css / ks > 0)
    theta = css[rho - 1] / rho
    x = np.maximum(v - theta, 0.0)
    # absorb rounding so the output sums to one
    return x / x.sum()


def simplex_cone_root(u) -> float:
    """Solve ``y + sum_i max(hat_i + y, 0) = tilde`` for the scalar ``y``.

    The left side is strictly increasing in ``y``, so the root is unique. It is
    located by sorting ``hat`` and evaluating the left side at the breakpoints
    ``-hat_i``; no bisection is involved.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite entries in lifted vector")
    return _simplex_root(u[0], u[1:])


def _simplex_root(tilde: float, hat: np.ndarray) -> float:
    b = -np.sort(-hat)
    prefix = np.cumsum(b)
    j = np.arange(1, b.size + 1)
    # residual at y = -b_j; component j is active at the root iff this is < 0
    at_breaks = (prefix - b) - j * b - tilde
    k = int(np.count_nonzero(at_breaks < 0))
    head = prefix[k - 1] if k > 0 else 0.0
    return (tilde - head) / (1 + k)


def _clamp_radius(c: float, a: np.ndarray, kappa: float) -> float:
    """argmin over r >= 0 of ``(kappa*r - c)^2 + sum_i max(a_i - r, 0)^2``.

    ``a`` must be nonnegative. The objective is a convex piecewise quadratic
    with breakpoints at the ``a_i``; the active set is read off the sorted
    breakpoints and the stationary point solved on that segment.
    """
    if a.size == 0:
        return max(c / kappa, 0.0)
    s = -np.sort(-a)
    prefix = np.cumsum(s)
    j = np.arange(1, s.size + 1)
    # half-derivative at r = s_j, decreasing in j
    slope = kappa * (kappa * s - c) - ((prefix - s) - (j - 1) * s)
    k = int(np.count_nonzero(slope > 0))
    head = prefix[k - 1] if k > 0 else 0.0
    r = (kappa * c + head) / (kappa * kappa + k)
    return max(r, 0.0)


def hyperplane_basis(m: int) -> np.ndarray:
    """Orthonormal basis of ``{v : sum(v) = 0}`` in R^m as an m x (m-1) matrix.

    Column i (1-based) is ``sqrt(i/(i+1)) * (1/i, ..., 1/i, -1, 0, ..., 0)``
    with ``1/i`` repeated i times.
    """
    if int(m) != m or m < 2:
        raise ValueError(f"hyperplane basis needs m >= 2, got {m}")
    m = int(m)
    B = np.zeros((m, m - 1))
    for i in range(1, m):
        B[:i, i - 1] = 1.0 / i
        B[i, i - 1] = -1.0
        B[:, i - 1] *= np.sqrt(i / (i + 1.0))
    return B


# ---------------------------------------------------------------------------
# geometries
# ---------------------------------------------------------------------------

class ConeGeometry:
    """Base class for a decision set with an exact lifted-cone projection.

    ``n`` is the dimension the cone lives over (the hat block), ``dim`` the
    dimension of actual decisions. They differ only for the affine reductions
    (``Ball`` with a center/radius and ``BallHyperplane``), where decisions are
    ``center + radius * basis @ s`` with ``s`` in the unit l2 ball.
    """

    kind = "abstract"
    kappa = 1.0

    def __init__(self, n: int):
        if int(n) != n or n < 1:
            raise ValueError(f"dimension must be a positive integer, got {n}")
        self.n = int(n)
        self.dim = self.n

    def __repr__(self):
        return f"{type(self).__name__}({self.n})"

    # -- lifted-space operations -------------------------------------------

    def _check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim != 1 or u.size != self.n + 1:
            raise ValueError(
                f"lifted vector must have length {self.n + 1}, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("non-finite entries in lifted vector")
        return u

    def project(self, u) -> ProjectionPair:
        u = self._check(u)
        cone = self._cone_part(u)
        return ProjectionPair(cone, u - cone)

    def _cone_part(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def in_cone(self, u, tol: float = DEFAULT_TOL) -> bool:
        u = self._check(u)
        return self._in_cone(u[0], u[1:], tol * (1.0 + np.linalg.norm(u)))

    def in_polar(self, u, tol: float = DEFAULT_TOL) -> bool:
        u = self._check(u)
        return self._in_polar(u[0], u[1:], tol * (1.0 + np.linalg.norm(u)))

    def _in_cone(self, t, h, tol) -> bool:
        raise NotImplementedError

    def _in_polar(self, t, h, tol) -> bool:
        raise NotImplementedError

    def decision(self, cone_point: np.ndarray, fallback: np.ndarray) -> np.ndarray:
        """``(kappa / tilde) * hat`` for a point of C, or ``fallback`` at the apex."""
        t = cone_point[0]
        if t <= 0.0:
            return fallback.copy()
        return self._clean((self.kappa / t) * cone_point[1:])

    def _clean(self, s: np.ndarray) -> np.ndarray:
        return s

    # -- decision-space operations -----------------------------------------

    def initial(self) -> np.ndarray:
        """Default starting point, in reduced coordinates."""
        return np.zeros(self.n)

    def to_point(self, s: np.ndarray) -> np.ndarray:
        return s

    def reduce_loss(self, f: np.ndarray) -> np.ndarray:
        return f

    def contains(self, x, tol: float = DEFAULT_TOL) -> bool:
        raise NotImplementedError

    def linear_min(self, f) -> float:
        """``min over x in X of <f, x>``."""
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError


class Simplex(ConeGeometry):
    kind = "simplex"

    def _cone_part(self, u):
        t, h = u[0], u[1:]
        y = _simplex_root(t, h)
        out = np.empty_like(u)
        out[0] = t - y
        out[1:] = np.maximum(h + y, 0.0)
        return out

    def _in_cone(self, t, h, tol):
        return bool(t >= -tol and h.min() >= -tol and abs(h.sum() - t) <= tol)

    def _in_polar(self, t, h, tol):
        return bool(h.max() <= -t + tol)

    def _clean(self, s):
        s = np.maximum(s, 0.0)
        return s / s.sum()

    def initial(self):
        return np.full(self.n, 1.0 / self.n)

    def contains(self, x, tol=DEFAULT_TOL):
        x = np.asarray(x, dtype=float)
        return bool(x.min() >= -tol and abs(x.sum() - 1.0) <= tol)

    def linear_min(self, f):
        return float(np.min(f))

    @property
    def diameter(self):
        return np.sqrt(2.0) if self.n > 1 else 0.0


class L2Ball(ConeGeometry):
    """Unit Euclidean ball; the cone is the second-order cone."""

    kind = "l2"

    def _cone_part(self, u):
        t, h = u[0], u[1:]
        r = np.linalg.norm(h)
        if t >= r:
            return u.copy()
        if r <= -t:
            return np.zeros_like(u)
        # strictly between the cone and its polar, so r > 0 here
        y = 0.5 * (t - r)
        out = np.empty_like(u)
        out[0] = t - y
        out[1:] = h * (1.0 + y / r)
        return out

    def _in_cone(self, t, h, tol):
        return bool(np.linalg.norm(h) <= t + tol)

    def _in_polar(self, t, h, tol):
        return bool(np.linalg.norm(h) <= -t + tol)

    def _clean(self, s):
        r = np.linalg.norm(s)
        return s / r if r > 1.0 else s

    def contains(self, x, tol=DEFAULT_TOL):
        return bool(np.linalg.norm(x) <= 1.0 + tol)

    def linear_min(self, f):
        return -float(np.linalg.norm(f))

    @property
    def diameter(self):
        return 2.0


class L1Ball(ConeGeometry):
    """Unit l1 ball. Polar: ``||hat||_inf <= -tilde``."""

    kind = "l1"

    def _cone_part(self, u):
        t, h = u[0], u[1:]
        s = _clamp_radius(-t, np.abs(h), 1.0)
        polar = np.empty_like(u)
        polar[0] = -s
        polar[1:] = np.clip(h, -s, s)
        return u - polar

    def _in_cone(self, t, h, tol):
        return bool(np.abs(h).sum() <= t + tol)

    def _in_polar(self, t, h, tol):
        return bool(np.abs(h).max() <= -t + tol)

    def _clean(self, s):
        r = np.abs(s).sum()
        return s / r if r > 1.0 else s

    def contains(self, x, tol=DEFAULT_TOL):
        return bool(np.abs(x).sum() <= 1.0 + tol)

    def linear_min(self, f):
        return -float(np.abs(f).max())

    @property
    def diameter(self):
        return 2.0


class LInfBall(ConeGeometry):
    """Unit box ``[-1, 1]^n`` lifted at height ``kappa = sqrt(n)``.

    The cone is ``{(t, h) : kappa * ||h||_inf <= t}`` and is projected onto
    directly; the polar is ``{(t, h) : ||h||_1 <= -kappa * t}``.
    """

    kind = "linf"

    def __init__(self, n):
        super().__init__(n)
        self.kappa = float(np.sqrt(self.n))

    def _cone_part(self, u):
        t, h = u[0], u[1:]
        r = _clamp_radius(t, np.abs(h), self.kappa)
        out = np.empty_like(u)
        out[0] = self.kappa * r
        out[1:] = np.clip(h, -r, r)
        return out

    def _in_cone(self, t, h, tol):
        return bool(self.kappa * np.abs(h).max() <= t + tol)

    def _in_polar(self, t, h, tol):
        return bool(np.abs(h).sum() <= -self.kappa * t + tol)

    def _clean(self, s):
        return np.clip(s, -1.0, 1.0)

    def contains(self, x, tol=DEFAULT_TOL):
        return bool(np.abs(x).max() <= 1.0 + tol)

    def linear_min(self, f):
        return -float(np.abs(f).sum())

    @property
    def diameter(self):
        return 2.0 * self.kappa


class Ball(L2Ball):
    """Euclidean ball ``{x : ||x - center|| <= radius}``, reduced to the unit ball."""

    kind = "ball"

    def __init__(self, n, center=None, radius=1.0):
        super().__init__(n)
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.center = np.zeros(self.n) if center is None else np.asarray(center, dtype=float)
        if self.center.shape != (self.n,):
            raise ValueError("center has the wrong dimension")
        self.radius = float(radius)

    def __repr__(self):
        return f"Ball({self.n}, radius={self.radius})"

    def to_point(self, s):
        return self.center + self.radius * s

    def reduce_loss(self, f):
        return self.radius * f

    def contains(self, x, tol=DEFAULT_TOL):
        return bool(np.linalg.norm(np.asarray(x) - self.center) <= self.radius * (1.0 + tol))

    def linear_min(self, f):
        return float(f @ self.center) - self.radius * float(np.linalg.norm(f))

    @property
    def diameter(self):
        return 2.0 * self.radius


class BallHyperplane(L2Ball):
    """``{y : sum(y) = 1, ||y - center|| <= radius}`` for a center on the simplex.

    Decisions are ``center + radius * B @ s`` with ``B = hyperplane_basis(m)``
    and ``s`` in the unit ball of R^(m-1); lifted payoffs are handled in the
    reduced coordinates by the l2 kernel.
    """

    kind = "ball_hyperplane"

    def __init__(self, m, center=None, radius=1.0):
        super().__init__(int(m) - 1)
        m = self.n + 1
        self.dim = m
        self.center = np.full(m, 1.0 / m) if center is None else np.asarray(center, dtype=float)
        if self.center.shape != (m,) or abs(self.center.sum() - 1.0) > 1e-9:
            raise ValueError("center must be a point of the hyperplane sum(y) = 1")
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.radius = float(radius)
        self.basis = hyperplane_basis(m)

    def __repr__(self):
        return f"BallHyperplane({self.dim}, radius={self.radius})"

    def to_point(self, s):
        return self.center + self.radius * (self.basis @ s)

    def reduce_loss(self, f):
        return self.radius * (self.basis.T @ f)

    def contains(self, x, tol=DEFAULT_TOL):
        x = np.asarray(x, dtype=float)
        return bool(abs(x.sum() - 1.0) <= tol
                    and np.linalg.norm(x - self.center) <= self.radius * (1.0 + tol))

    def linear_min(self, f):
        f = np.asarray(f, dtype=float)
        return float(f @ self.center) - self.radius * float(np.linalg.norm(self.basis.T @ f))

    def inside_simplex(self) -> bool:
        """True when the whole slice lies in the simplex (nonnegative)."""
        # min over the slice of y_i is center_i - radius * ||B^T e_i||
        reach = self.radius * np.linalg.norm(self.basis, axis=1)
        return bool(np.all(self.center - reach >= 0.0))

    @property
    def diameter(self):
        return 2.0 * self.radius


# ---------------------------------------------------------------------------
# functional surface
# ---------------------------------------------------------------------------

def project_cone(geom: ConeGeometry, u) -> ProjectionPair:
    return geom.project(u)


def cone_membership(geom: ConeGeometry, u, tol: float = DEFAULT_TOL) -> bool:
    return geom.in_cone(u, tol)


def polar_membership(geom: ConeGeometry, u, tol: float = DEFAULT_TOL) -> bool:
    return geom.in_polar(u, tol)


GEOMETRIES = {
    "simplex": Simplex,
    "l1": L1Ball,
    "l2": L2Ball,
    "linf": LInfBall,
}
