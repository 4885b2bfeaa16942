"""Planar primitives shared by the whole package.

Vectors, direction angles, reflection across a line, Lagrange-Gauss lattice
reduction, rectangle corner geometry, and the tolerance policy. Everything
here is a pure function of its arguments; no global state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TAU = 2.0 * math.pi


class WindtreeError(Exception):
    """Base class for every error raised by this package."""


class DegenerateLattice(WindtreeError):
    """Lattice basis is (numerically) linearly dependent."""


class DegenerateAngle(WindtreeError):
    """Tilt angle outside the open interval (0, pi/2)."""


@dataclass(frozen=True)
class Vec2:
    """Point or displacement in the plane, in length units."""

    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def scaled(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def norm2(self) -> float:
        return self.x * self.x + self.y * self.y

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Tolerance:
    """Tolerance policy: eps_geom is relative, eps_corner is absolute.

    eps_corner is the corner-hit radius in length units; it only decides
    when a trace stops with a corner event, so it scales with the obstacle.
    """

    eps_geom: float = 1e-12
    eps_corner: float = 1e-9

    def __post_init__(self) -> None:
        if not (0.0 < self.eps_geom < 1e-6):
            raise ValueError("eps_geom must lie in (0, 1e-6)")
        if not self.eps_corner > 0.0:
            raise ValueError("eps_corner must be positive")


def default_tolerance(a: float, b: float) -> Tolerance:
    """Default policy for an a x b rectangle: corner radius 1e-9 * max(a, b)."""
    return Tolerance(eps_geom=1e-12, eps_corner=1e-9 * max(a, b))


def normalize_angle(phi: float) -> float:
    """Reduce an angle in radians to [0, tau). The guard keeps the result
    strictly below tau when rounding lands exactly on it."""
    r = math.fmod(phi, TAU)
    if r < 0.0:
        r += TAU
    if r >= TAU:
        r = 0.0
    return r


def angle_distance(phi: float, psi: float) -> float:
    """Circular distance between two angles, in [0, pi]."""
    d = math.fmod(phi - psi, TAU)
    if d < 0.0:
        d += TAU
    return min(d, TAU - d)


def reflect_direction(phi: float, line_angle: float) -> float:
    """Reflect a direction angle across the line making `line_angle` with the
    positive x-axis: phi maps to (2 * line_angle - phi) mod tau.

    Involutive up to one ulp of angle arithmetic. A direction lying on the
    mirror line is fixed.
    """
    return normalize_angle(2.0 * line_angle - phi)


def lattice_reduce(
    e1: Vec2, e2: Vec2, eps_geom: float = 1e-12
) -> tuple[Vec2, Vec2, tuple[tuple[int, int], tuple[int, int]]]:
    """Lagrange-Gauss reduction of a planar lattice basis.

    Returns (f1, f2, M) where (f1, f2) is a reduced basis of the same
    lattice and M is an integer matrix with det +-1 whose rows express the
    output in the input basis: f1 = M[0][0]*e1 + M[0][1]*e2 and
    f2 = M[1][0]*e1 + M[1][1]*e2. The output satisfies the Lagrange
    condition |f1| <= |f2| <= |f2 +- f1|.
    """
    det = e1.cross(e2)
    if abs(det) < eps_geom * e1.norm() * e2.norm():
        raise DegenerateLattice(
            f"basis {e1.as_tuple()}, {e2.as_tuple()} is numerically dependent"
        )
    u, v = e1, e2
    mu: list[int] = [1, 0]
    mv: list[int] = [0, 1]
    if u.norm2() > v.norm2():
        u, v = v, u
        mu, mv = mv, mu
    while True:
        q = round(v.dot(u) / u.norm2())
        if q != 0:
            v = v - u.scaled(float(q))
            mv = [mv[0] - q * mu[0], mv[1] - q * mu[1]]
        if v.norm2() < u.norm2():
            u, v = v, u
            mu, mv = mv, mu
        else:
            break
    return u, v, ((mu[0], mu[1]), (mv[0], mv[1]))


def rectangle_corners(
    a: float, b: float, theta: float, center: Vec2
) -> tuple[Vec2, Vec2, Vec2, Vec2]:
    """Corners of the a x b rectangle centered at `center`, the side of
    length a making angle theta with the horizontal.

    Counterclockwise order starting from the corner with the smallest
    y-coordinate; that corner is unique because theta is strictly inside
    (0, pi/2).
    """
    if not (0.0 < theta < math.pi / 2.0):
        raise DegenerateAngle(f"theta={theta} outside (0, pi/2)")
    if a <= 0.0 or b <= 0.0:
        raise ValueError("rectangle sides must be positive")
    c, s = math.cos(theta), math.sin(theta)
    ha, hb = 0.5 * a, 0.5 * b
    ax, ay = ha * c, ha * s
    bx, by = hb * s, hb * c
    return (
        Vec2(center.x - ax + bx, center.y - ay - by),
        Vec2(center.x + ax + bx, center.y + ay - by),
        Vec2(center.x + ax - bx, center.y + ay + by),
        Vec2(center.x - ax - bx, center.y - ay + by),
    )


def point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> float:
    """Euclidean distance from point p to the closed segment [a, b]."""
    ab = b - a
    denom = ab.norm2()
    if denom == 0.0:
        return (p - a).norm()
    t = (p - a).dot(ab) / denom
    if t <= 0.0:
        return (p - a).norm()
    if t >= 1.0:
        return (p - b).norm()
    proj = Vec2(a.x + t * ab.x, a.y + t * ab.y)
    return (p - proj).norm()
