import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cbasolve.geometry import (
    GEOMETRIES,
    Ball,
    BallHyperplane,
    L1Ball,
    L2Ball,
    LInfBall,
    Simplex,
    cone_membership,
    hyperplane_basis,
    lift,
    polar_membership,
    project_cone,
    project_simplex,
    simplex_cone_root,
)

from oracles import cone_projection, simplex_projection


def close(a, b, tol=1e-12):
    return np.allclose(a, b, atol=tol, rtol=0)


# -- worked examples ---------------------------------------------------------

@pytest.mark.parametrize("u, cone", [
    ((1, 0.5, 0.5), (1, 0.5, 0.5)),
    ((-1, -2, -3), (0, 0, 0)),
    ((0, 1, -1), (0.5, 0.5, 0)),
])
def test_simplex_projection_examples(u, cone):
    pair = project_cone(Simplex(2), u)
    assert close(pair.onto_cone, cone)
    assert close(pair.onto_polar, np.array(u) - np.array(cone))


def test_simplex_polar_part_of_mixed_vector():
    pair = project_cone(Simplex(2), (0, 1, -1))
    assert close(pair.onto_polar, (-0.5, 0.5, -1))


def test_l2_examples():
    pair = project_cone(L2Ball(2), (0, 3, 4))
    assert close(pair.onto_cone, (2.5, 1.5, 2.0))
    assert close(pair.onto_polar, (-2.5, 1.5, 2.0))
    assert close(project_cone(L2Ball(2), (5, 3, 4)).onto_cone, (5, 3, 4))


def test_l2_zero_hat_block():
    assert close(project_cone(L2Ball(3), (-2, 0, 0, 0)).onto_polar, (-2, 0, 0, 0))
    assert close(project_cone(L2Ball(3), (2, 0, 0, 0)).onto_cone, (2, 0, 0, 0))


def test_linf_one_dimensional_ray():
    g = LInfBall(1)
    assert g.kappa == 1.0
    assert close(project_cone(g, (0, 2)).onto_cone, (1, 1))


def test_membership_examples():
    assert polar_membership(Simplex(2), (-1, -2, -3))
    assert not polar_membership(Simplex(2), (0, 1, -1))
    assert polar_membership(L2Ball(2), (-2.5, 1.5, 2.0))
    assert cone_membership(Simplex(2), (2, 1, 1))
    assert cone_membership(Simplex(2), (0, 0, 0))
    assert not cone_membership(L2Ball(2), (1, 0.8, 0.8))


@pytest.mark.parametrize("u, root", [
    ((0, 1, -1), -0.5),
    ((0.5, -1, 0), 0.25),
    ((1, 0, 0), 1 / 3),
])
def test_simplex_cone_root(u, root):
    y = simplex_cone_root(u)
    assert y == pytest.approx(root, abs=1e-14)
    t, h = u[0], np.array(u[1:])
    assert abs(y + np.maximum(h + y, 0).sum() - t) <= 1e-10 * (1 + abs(t))


@pytest.mark.parametrize("v, expected", [
    ((0.6, 0.6), (0.5, 0.5)),
    ((2, -1), (1, 0)),
    ((0.2, 0.3, 0.5), (0.2, 0.3, 0.5)),
])
def test_project_simplex_examples(v, expected):
    assert close(project_simplex(v), expected, 1e-15)


def test_project_simplex_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError):
        project_simplex([])
    with pytest.raises(ValueError):
        project_simplex([1.0, np.nan])


def test_hyperplane_basis_columns():
    assert close(hyperplane_basis(2)[:, 0], np.sqrt(0.5) * np.array([1, -1]))
    col = hyperplane_basis(3)[:, 1]
    assert close(col, np.sqrt(2 / 3) * np.array([0.5, 0.5, -1]))
    assert np.linalg.norm(col) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        hyperplane_basis(1)


@pytest.mark.parametrize("m", [2, 3, 7, 40])
def test_hyperplane_basis_orthonormal(m):
    B = hyperplane_basis(m)
    assert B.shape == (m, m - 1)
    assert close(B.T @ B, np.eye(m - 1))
    assert close(B.T @ np.ones(m), 0)


def test_dimension_and_finiteness_errors():
    with pytest.raises(ValueError):
        project_cone(Simplex(3), (1, 2))
    with pytest.raises(ValueError):
        project_cone(L2Ball(1), (np.inf, 1))
    with pytest.raises(ValueError):
        cone_membership(L1Ball(2), (1, 1, 1, 1))
    with pytest.raises(ValueError):
        simplex_cone_root((np.nan, 1))


def test_kappa_values():
    assert Simplex(5).kappa == L1Ball(5).kappa == L2Ball(5).kappa == 1.0
    assert LInfBall(9).kappa == 3.0
    assert BallHyperplane(4, radius=0.1).kappa == 1.0


# -- reduced geometries ------------------------------------------------------

def test_ball_reduction_round_trip():
    g = Ball(3, center=[1.0, -2.0, 0.5], radius=4.0)
    s = np.array([0.6, 0.0, -0.8])
    x = g.to_point(s)
    assert g.contains(x)
    f = np.array([1.0, 2.0, 3.0])
    # <f, x> = <f, center> + <reduced loss, s>
    assert f @ x == pytest.approx(f @ g.center + g.reduce_loss(f) @ s)
    assert g.linear_min(f) == pytest.approx(f @ g.center - 4.0 * np.linalg.norm(f))


def test_ball_hyperplane_reduction():
    g = BallHyperplane(5, radius=0.05)
    rng = np.random.default_rng(3)
    s = rng.normal(size=4)
    s /= np.linalg.norm(s)
    y = g.to_point(s)
    assert g.contains(y)
    assert y.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.linalg.norm(y - g.center) == pytest.approx(0.05)
    f = rng.normal(size=5)
    assert f @ y == pytest.approx(f @ g.center + g.reduce_loss(f) @ s)


def test_ball_hyperplane_containment_check():
    assert BallHyperplane(3, radius=0.1).inside_simplex()
    assert not BallHyperplane(50, radius=np.sqrt(1 / 100)).inside_simplex()


@pytest.mark.parametrize("kind", sorted(GEOMETRIES))
def test_linear_min_matches_sampled_points(kind):
    rng = np.random.default_rng(11)
    g = GEOMETRIES[kind](4)
    f = rng.normal(size=4)
    best = g.linear_min(f)
    # the decision recovered from a cone projection of (0, -f) attains the minimum
    u = lift(0.0, -f)
    x = g.decision(g.project(u).onto_cone, g.initial())
    assert g.contains(x)
    assert f @ x >= best - 1e-12
    for _ in range(200):
        z = g.decision(g.project(rng.normal(size=5) * 3).onto_cone, g.initial())
        assert f @ z >= best - 1e-12


# -- properties ---------------------------------------------------------------

geometry_kind = st.sampled_from(sorted(GEOMETRIES))
lifted = st.integers(1, 12).flatmap(
    lambda n: arrays(np.float64, n + 1, elements=st.floats(-10, 10, allow_nan=False)))


@settings(max_examples=300, deadline=None)
@given(geometry_kind, lifted)
def test_moreau_decomposition(kind, u):
    g = GEOMETRIES[kind](u.size - 1)
    cone, polar = g.project(u)
    scale = 1.0 + np.linalg.norm(u)
    assert np.linalg.norm(cone + polar - u) <= 1e-8 * scale
    assert abs(cone @ polar) <= 1e-8 * scale ** 2
    assert g.in_cone(cone)
    assert g.in_polar(polar)
    assert np.linalg.norm(cone) <= np.linalg.norm(u) * (1 + 1e-12) + 1e-12


@settings(max_examples=200, deadline=None)
@given(geometry_kind, lifted)
def test_idempotent(kind, u):
    g = GEOMETRIES[kind](u.size - 1)
    cone = g.project(u).onto_cone
    assert np.allclose(g.project(cone).onto_cone, cone, atol=1e-9, rtol=0)
    # a point of C is its own projection and sits at distance |u| from the polar
    assert np.linalg.norm(cone - g.project(cone).onto_polar) == pytest.approx(
        np.linalg.norm(cone), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(geometry_kind, lifted, st.sampled_from([0.5, 2.0, 100.0]))
def test_positive_homogeneity(kind, u, c):
    g = GEOMETRIES[kind](u.size - 1)
    a = g.project(c * u).onto_cone
    b = c * g.project(u).onto_cone
    assert np.linalg.norm(a - b) <= 1e-8 * (1 + np.linalg.norm(b))


@settings(max_examples=200, deadline=None)
@given(lifted)
def test_negated_cone_point_is_polar_for_simplex(u):
    g = Simplex(u.size - 1)
    cone = g.project(u).onto_cone
    assert g.in_polar(-cone)


@settings(max_examples=100, deadline=None)
@given(geometry_kind, lifted)
def test_matches_gradient_oracle(kind, u):
    g = GEOMETRIES[kind](u.size - 1)
    expected = cone_projection(kind, u)
    assert np.linalg.norm(g.project(u).onto_cone - expected) <= 1e-6 * (1 + np.linalg.norm(u))


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(1, 30), elements=st.floats(-100, 100, allow_nan=False)))
def test_project_simplex_against_bisection(v):
    x = project_simplex(v)
    assert x.min() >= 0.0
    assert abs(x.sum() - 1.0) <= 1e-12
    assert np.allclose(x, simplex_projection(v), atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(lifted)
def test_simplex_root_residual(u):
    y = simplex_cone_root(u)
    t, h = u[0], u[1:]
    assert abs(y + np.maximum(h + y, 0).sum() - t) <= 1e-10 * (1 + np.abs(u).sum())
