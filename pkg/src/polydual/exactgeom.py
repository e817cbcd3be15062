"""Exact rational scalars, small vectors, and determinant primitives.

Everything downstream computes over arbitrary-precision rationals
(`fractions.Fraction`); no floating point is ever introduced.  Plain
ints are accepted wherever a scalar is expected and are kept exact.
Euclidean lengths are never taken: all size comparisons go through
squared norms or coordinate spreads, which stay rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .errors import ParseError

Scalar = Fraction
ScalarLike = Union[int, Fraction, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def scalar(value: ScalarLike) -> Fraction:
    """Coerce an int, Fraction, or "p/q" string to an exact rational.

    Floats are rejected: admitting them would smuggle rounding into a
    library whose whole point is exactness.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational number: {value!r}") from exc
    raise ParseError(f"expected an exact scalar, got {type(value).__name__}")


def is_integer(value: Fraction) -> bool:
    return value.denominator == 1


@dataclass(frozen=True, slots=True)
class Vec2:
    x: Fraction
    y: Fraction

    @staticmethod
    def of(x: ScalarLike, y: ScalarLike) -> "Vec2":
        return Vec2(scalar(x), scalar(y))

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def scaled(self, factor: ScalarLike) -> "Vec2":
        f = scalar(factor)
        return Vec2(f * self.x, f * self.y)

    def dot(self, other: "Vec2") -> Fraction:
        return self.x * other.x + self.y * other.y

    def perp_cw(self) -> "Vec2":
        """Rotate by -90 degrees: (x, y) -> (y, -x)."""
        return Vec2(self.y, -self.x)

    def norm_sq(self) -> Fraction:
        return self.x * self.x + self.y * self.y

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_integer(self) -> bool:
        return is_integer(self.x) and is_integer(self.y)

    def coords(self) -> tuple[Fraction, Fraction]:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class Vec3:
    x: Fraction
    y: Fraction
    z: Fraction

    @staticmethod
    def of(x: ScalarLike, y: ScalarLike, z: ScalarLike) -> "Vec3":
        return Vec3(scalar(x), scalar(y), scalar(z))

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def scaled(self, factor: ScalarLike) -> "Vec3":
        f = scalar(factor)
        return Vec3(f * self.x, f * self.y, f * self.z)

    def dot(self, other: "Vec3") -> Fraction:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm_sq(self) -> Fraction:
        return self.dot(self)

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0 and self.z == 0

    def is_integer(self) -> bool:
        return is_integer(self.x) and is_integer(self.y) and is_integer(self.z)

    def xy(self) -> Vec2:
        return Vec2(self.x, self.y)

    def coords(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.x, self.y, self.z)


def cross(a: Vec3, b: Vec3) -> Vec3:
    return Vec3(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )


def det2(a: Vec2, b: Vec2) -> Fraction:
    return a.x * b.y - a.y * b.x


def det3(a: Vec3, b: Vec3, c: Vec3) -> Fraction:
    """Determinant of the 3x3 matrix with columns a, b, c."""
    return (
        a.x * (b.y * c.z - b.z * c.y)
        - b.x * (a.y * c.z - a.z * c.y)
        + c.x * (a.y * b.z - a.z * b.y)
    )


def bracket3(p: Vec2, q: Vec2, r: Vec2) -> Fraction:
    """Oriented-area bracket [pqr]: twice the signed area of triangle pqr.

    Equals the determinant of the 3x3 matrix whose columns are (p, 1),
    (q, 1), (r, 1); positive when p, q, r run counterclockwise.
    """
    return det2(q - p, r - p)


def bracket4(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Fraction:
    """Oriented-volume bracket [abcd].

    Determinant of the 4x4 matrix whose columns are the points with a
    row of ones appended at the bottom.  With the ones row at the
    bottom this evaluates to -det3(b - a, c - a, d - a); it vanishes
    exactly when the four points are coplanar.
    """
    return -det3(b - a, c - a, d - a)


def parallel_ratio(t: Vec3, u: Vec3) -> Fraction | None:
    """The scalar s with t == s*u, or None if t is not parallel to u.

    Requires u != 0.
    """
    if u.is_zero():
        raise ValueError("ratio against the zero vector")
    if not cross(t, u).is_zero():
        return None
    for tc, uc in zip(t.coords(), u.coords()):
        if uc != 0:
            return tc / uc
    raise AssertionError("unreachable: u is nonzero")


def lcm_denominator(values: Iterable[Fraction]) -> int:
    """Least common denominator of a collection of rationals."""
    import math

    lcm = 1
    for v in values:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return lcm
