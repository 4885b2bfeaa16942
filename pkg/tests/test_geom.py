import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windtree.geom import (
    TAU,
    DegenerateAngle,
    DegenerateLattice,
    Tolerance,
    Vec2,
    angle_distance,
    default_tolerance,
    lattice_reduce,
    normalize_angle,
    point_segment_distance,
    rectangle_corners,
    reflect_direction,
)

ANGLE_TOL = 1e-12


def brute_force_reduced_norms(e1, e2, span=10):
    """Oracle: the two successive minima of the lattice, found by brute force
    over integer combinations with coefficients in [-span, span]."""
    vecs = []
    for i in range(-span, span + 1):
        for j in range(-span, span + 1):
            if i == 0 and j == 0:
                continue
            vecs.append(Vec2(i * e1.x + j * e2.x, i * e1.y + j * e2.y))
    vecs.sort(key=lambda v: v.norm2())
    shortest = vecs[0]
    for v in vecs[1:]:
        if abs(shortest.cross(v)) > 1e-9:
            return shortest.norm(), v.norm()
    raise AssertionError("no independent second vector found")


def test_reflect_direction_example():
    out = reflect_direction(math.pi / 2, math.pi / 6)
    assert angle_distance(out, normalize_angle(-math.pi / 6)) < ANGLE_TOL


def test_reflect_direction_fixed_on_line():
    assert angle_distance(reflect_direction(math.pi / 4, math.pi / 4), math.pi / 4) < ANGLE_TOL


@given(
    st.floats(0.0, TAU, exclude_max=True),
    st.floats(-10.0, 10.0),
)
def test_reflect_direction_involutive(phi, alpha):
    twice = reflect_direction(reflect_direction(phi, alpha), alpha)
    assert angle_distance(twice, phi) < ANGLE_TOL


@given(st.floats(0.0, TAU, exclude_max=True), st.floats(-10.0, 10.0))
def test_parallel_reflections_preserve_direction(phi, alpha):
    out = reflect_direction(reflect_direction(phi, alpha), alpha + math.pi)
    assert angle_distance(out, phi) < 1e-11


@given(st.floats(0.0, TAU, exclude_max=True), st.floats(-10.0, 10.0))
def test_perpendicular_reflections_negate_direction(phi, alpha):
    out = reflect_direction(reflect_direction(phi, alpha), alpha + math.pi / 2)
    assert angle_distance(out, phi + math.pi) < 1e-11


def test_normalize_angle_guard():
    assert normalize_angle(TAU) == 0.0
    assert normalize_angle(-1e-300) < TAU
    assert 0.0 <= normalize_angle(1e9) < TAU


def test_lattice_reduce_identity():
    f1, f2, m = lattice_reduce(Vec2(1, 0), Vec2(0, 1))
    assert (f1.as_tuple(), f2.as_tuple()) == ((1.0, 0.0), (0.0, 1.0))
    assert m == ((1, 0), (0, 1))


def test_lattice_reduce_spec_case():
    e1, e2 = Vec2(5, 1), Vec2(4, 1)
    f1, f2, m = lattice_reduce(e1, e2)
    assert {round(f1.norm(), 9), round(f2.norm(), 9)} == {1.0, 1.0}
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    assert det in (-1, 1)
    # rows of m reproduce the outputs from the inputs
    for f, row in ((f1, m[0]), (f2, m[1])):
        assert f.x == pytest.approx(row[0] * e1.x + row[1] * e2.x, abs=1e-12)
        assert f.y == pytest.approx(row[0] * e1.y + row[1] * e2.y, abs=1e-12)


def test_lattice_reduce_degenerate():
    with pytest.raises(DegenerateLattice):
        lattice_reduce(Vec2(1, 1), Vec2(2, 2 + 1e-15))


@settings(max_examples=200)
@given(
    st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9)
)
def test_lattice_reduce_matches_brute_force(a, b, c, d):
    if a * d - b * c == 0:
        return
    e1, e2 = Vec2(float(a), float(b)), Vec2(float(c), float(d))
    f1, f2, m = lattice_reduce(e1, e2)
    n1, n2 = brute_force_reduced_norms(e1, e2)
    assert f1.norm() == pytest.approx(n1, rel=1e-9)
    assert f2.norm() == pytest.approx(n2, rel=1e-9)
    assert abs(m[0][0] * m[1][1] - m[0][1] * m[1][0]) == 1
    # Lagrange condition
    assert f1.norm() <= f2.norm() + 1e-12
    assert f2.norm() <= (f2 + f1).norm() + 1e-12
    assert f2.norm() <= (f2 - f1).norm() + 1e-12


@settings(max_examples=200)
@given(
    st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)
)
def test_lattice_reduce_same_lattice(ax, ay, bx, by):
    e1, e2 = Vec2(ax, ay), Vec2(bx, by)
    if abs(e1.cross(e2)) < 1e-3:
        return
    f1, f2, m = lattice_reduce(e1, e2)
    # integer round-trip: express e1, e2 back in the reduced basis
    det = f1.cross(f2)
    for e in (e1, e2):
        u = e.cross(f2) / det
        v = f1.cross(e) / det
        assert abs(u - round(u)) < 1e-6
        assert abs(v - round(v)) < 1e-6


def test_rectangle_corners_rotated_square():
    r = math.sqrt(2.0)
    c = rectangle_corners(r, r, math.pi / 4, Vec2(0, 0))
    expect = [(0, -1), (1, 0), (0, 1), (-1, 0)]
    for got, (ex, ey) in zip(c, expect):
        assert got.x == pytest.approx(ex, abs=1e-12)
        assert got.y == pytest.approx(ey, abs=1e-12)


def rotation_oracle_corners(a, b, theta, center):
    """Oracle: rotate the axis-aligned corner list explicitly and re-sort so
    the lowest corner comes first, preserving counterclockwise order."""
    base = [(-a / 2, -b / 2), (a / 2, -b / 2), (a / 2, b / 2), (-a / 2, b / 2)]
    c, s = math.cos(theta), math.sin(theta)
    pts = [Vec2(center.x + x * c - y * s, center.y + x * s + y * c) for x, y in base]
    low = min(range(4), key=lambda i: pts[i].y)
    return [pts[(low + i) % 4] for i in range(4)]


@settings(max_examples=200)
@given(
    st.floats(0.1, 5.0),
    st.floats(0.1, 5.0),
    st.floats(0.01, math.pi / 2 - 0.01),
    st.floats(-3, 3),
    st.floats(-3, 3),
)
def test_rectangle_corners_match_rotation_oracle(a, b, theta, cx, cy):
    got = rectangle_corners(a, b, theta, Vec2(cx, cy))
    want = rotation_oracle_corners(a, b, theta, Vec2(cx, cy))
    for g, w in zip(got, want):
        assert g.x == pytest.approx(w.x, abs=1e-9)
        assert g.y == pytest.approx(w.y, abs=1e-9)
    # corners average to the center
    assert sum(p.x for p in got) / 4 == pytest.approx(cx, abs=1e-9)
    assert sum(p.y for p in got) / 4 == pytest.approx(cy, abs=1e-9)


def test_rectangle_corners_lowest_formula():
    a, b, theta = 2.0, 1.0, math.pi / 6
    c = rectangle_corners(a, b, theta, Vec2(0, 0))
    want = -(a * math.sin(theta) + b * math.cos(theta)) / 2
    assert c[0].y == pytest.approx(want, abs=1e-14)


def test_rectangle_corners_rejects_degenerate_angle():
    for bad in (0.0, math.pi / 2, -0.3, 2.0):
        with pytest.raises(DegenerateAngle):
            rectangle_corners(1, 1, bad, Vec2(0, 0))


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerance(eps_geom=1e-3)
    with pytest.raises(ValueError):
        Tolerance(eps_corner=0.0)
    t = default_tolerance(2.0, 1.0)
    assert t.eps_corner == pytest.approx(2e-9)


def test_point_segment_distance():
    a, b = Vec2(0, 0), Vec2(10, 0)
    assert point_segment_distance(Vec2(5, 3), a, b) == pytest.approx(3.0)
    assert point_segment_distance(Vec2(-4, 3), a, b) == pytest.approx(5.0)
    assert point_segment_distance(Vec2(13, 4), a, b) == pytest.approx(5.0)
    assert point_segment_distance(Vec2(2, 0), a, a) == pytest.approx(2.0)
