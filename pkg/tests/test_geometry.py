import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from feaskit import DegenerateConfiguration, DimensionMismatch, Halfspace, circumcenter3, project_halfspace, reflect
from oracles import grid_circumcenter_2d, qp_halfspace_projection


@pytest.mark.parametrize(
    "a, alpha, x, expected",
    [
        ((1, 0), 0, (2, 3), (0, 3)),
        ((1, 0), 0, (-1, 5), (-1, 5)),
        # frozen from qp_halfspace_projection
        ((3, 4), 1, (2, 2), (0.44, -0.08)),
    ],
)
def test_project_halfspace_examples(a, alpha, x, expected):
    np.testing.assert_allclose(project_halfspace(Halfspace(a, alpha), x), expected, atol=1e-15)


@pytest.mark.parametrize(
    "a, alpha, x, expected",
    [
        ((1, 0), 0, (2, 3), (-2, 3)),
        ((1, 0), 0, (-1, 5), (-1, 5)),
        # 2 * (0.44, -0.08) - (2, 2), from the QP-verified projection
        ((3, 4), 1, (2, 2), (-1.12, -2.16)),
    ],
)
def test_reflect_examples(a, alpha, x, expected):
    np.testing.assert_allclose(reflect(Halfspace(a, alpha), x), expected, atol=1e-14)


def test_zero_normal_rejected():
    with pytest.raises(ValueError):
        Halfspace([0.0, 0.0], 1.0)


def test_dimension_mismatch():
    h = Halfspace([1.0, 0.0], 0.0)
    with pytest.raises(DimensionMismatch):
        project_halfspace(h, [1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatch):
        reflect(h, [1.0])
    with pytest.raises(DimensionMismatch):
        circumcenter3([0.0, 0.0], [1.0], [0.0, 1.0])


def test_qp_oracle_fuzz():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(300):
        n = int(rng.integers(1, 21))
        a = rng.standard_normal(n)
        alpha = rng.standard_normal()
        x = 3 * rng.standard_normal(n)
        p = project_halfspace(Halfspace(a, alpha), x)
        worst = max(worst, np.abs(p - qp_halfspace_projection(a, alpha, x)).max())
    assert worst <= 1e-10


finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


@st.composite
def halfspace_and_point(draw):
    n = draw(st.integers(1, 8))
    a = draw(arrays(float, n, elements=finite).filter(lambda v: np.linalg.norm(v) > 1e-3))
    alpha = draw(finite)
    x = draw(arrays(float, n, elements=finite))
    return a, alpha, x


@settings(max_examples=300, deadline=None)
@given(halfspace_and_point())
def test_projection_properties(case):
    a, alpha, x = case
    h = Halfspace(a, alpha)
    p = project_halfspace(h, x)
    scale = 1.0 + np.abs(a).max() * np.abs(x).max() + abs(alpha)
    assert a @ p <= alpha + 1e-12 * scale
    np.testing.assert_allclose(project_halfspace(h, p), p, atol=1e-12 * (1 + np.abs(p).max()))
    # x - p is a nonnegative multiple of a
    d = x - p
    t = (d @ a) / (a @ a)
    assert t >= 0
    np.testing.assert_allclose(d, t * a, atol=1e-12 * (1 + np.abs(x).max()))
    if a @ x <= alpha:
        assert np.array_equal(p, x)


@settings(max_examples=200, deadline=None)
@given(halfspace_and_point())
def test_reflection_mirrors_across_boundary(case):
    a, alpha, x = case
    h = Halfspace(a, alpha)
    y = reflect(h, x)
    tol = 1e-9 * (1 + np.abs(x).max() + abs(alpha)) * (1 + np.abs(a).max())
    if a @ x > alpha:
        # y is the mirror image of x in the boundary hyperplane, so it lies in h
        assert a @ y <= alpha + tol
        np.testing.assert_allclose((x + y) / 2, project_halfspace(h, x), atol=tol)
        mirror = y - 2 * ((a @ y - alpha) / (a @ a)) * a
        np.testing.assert_allclose(mirror, x, atol=tol)
        np.testing.assert_array_equal(reflect(h, y), y)
    else:
        np.testing.assert_array_equal(y, x)


def test_circumcenter_coincident_points():
    p = np.array([1.5, -2.0, 0.25])
    np.testing.assert_array_equal(circumcenter3(p, p, p), p)


def test_circumcenter_two_distinct_points():
    p, q = np.array([0.0, 1.0]), np.array([4.0, -1.0])
    for args in [(p, q, q), (p, p, q), (p, q, p)]:
        np.testing.assert_allclose(circumcenter3(*args), (p + q) / 2)


def test_circumcenter_matches_grid_oracle():
    # the grid oracle (step 0.01) lands on (1, 0); exact value by hand
    pts = ((0, 0), (2, 0), (1, 1))
    np.testing.assert_allclose(grid_circumcenter_2d(*pts), (1, 0), atol=1e-12)
    np.testing.assert_allclose(circumcenter3(*pts), (1, 0), atol=1e-15)


def test_circumcenter_collinear_is_degenerate():
    with pytest.raises(DegenerateConfiguration):
        circumcenter3([0.0, 0.0], [1.0, 1.0], [3.0, 3.0])


def test_circumcenter_symmetric_collinear_is_degenerate():
    with pytest.raises(DegenerateConfiguration):
        circumcenter3([0.0], [1.0], [-1.0])


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 12).flatmap(lambda n: st.tuples(*[arrays(float, n, elements=st.floats(-10, 10))] * 3)))
def test_circumcenter_equidistant_in_affine_hull(pts):
    x, y, z = pts
    try:
        c = circumcenter3(x, y, z)
    except DegenerateConfiguration:
        return
    d = [np.linalg.norm(c - p) for p in (x, y, z)]
    diam = max(np.linalg.norm(x - y), np.linalg.norm(x - z), np.linalg.norm(y - z))
    assert max(d) - min(d) <= 1e-8 * (1 + diam)
    # c - x lies in span{y - x, z - x}
    B = np.stack([y - x, z - x], axis=1)
    coef, *_ = np.linalg.lstsq(B, c - x, rcond=None)
    np.testing.assert_allclose(B @ coef, c - x, atol=1e-7 * (1 + np.abs(c - x).max()))
