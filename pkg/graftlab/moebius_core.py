"""Möbius transformations acting on the sphere, the upper half-plane and upper half-space.

All values are immutable. H² is the upper half-plane {x + ih : h > 0} and H³ the upper
half-space {(x, y, h) : h > 0}; both are the models every other graftlab module assumes.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Optional, Tuple, Union

import numpy as np

from graftlab.errors import (
    CirclesIntersectError,
    DegenerateError,
    DisjointError,
    IdentityMapError,
    NotLoxodromicError,
)
from graftlab.settings import get_tolerances

LOGGER = logging.getLogger(__name__)

Number = Union[int, float, complex]


class MapType(str, Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    LOXODROMIC = "loxodromic"


def _coerce_complex(raw: Any) -> complex:
    """Accept a number or a [re, im] pair."""
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise DegenerateError(f"complex entry must be [re, im], got {raw!r}")
        return complex(float(raw[0]), float(raw[1]))
    if isinstance(raw, complex):
        return raw
    return complex(float(raw), 0.0)


@dataclass(frozen=True)
class MoebiusMap:
    """z ↦ (az + b)/(cz + d) with ad − bc = 1, defined up to sign."""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_entries(cls, a: Number, b: Number, c: Number, d: Number) -> "MoebiusMap":
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        det = a * d - b * c
        magnitude = max(abs(a * d) + abs(b * c), 1e-300)
        if abs(det) <= get_tolerances().algebraic * magnitude:
            raise DegenerateError("Möbius matrix has vanishing determinant")
        root = cmath.sqrt(det)
        return cls(a / root, b / root, c / root, d / root)

    @classmethod
    def from_matrix(cls, matrix: Any) -> "MoebiusMap":
        arr = np.asarray(matrix, dtype=complex)
        if arr.shape != (2, 2):
            raise DegenerateError(f"expected a 2x2 matrix, got shape {arr.shape}")
        return cls.from_entries(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @classmethod
    def diagonal(cls, k: Number) -> "MoebiusMap":
        """The dilation z ↦ k z."""
        root = cmath.sqrt(complex(k))
        return cls.from_entries(root, 0, 0, 1 / root)

    @classmethod
    def translation(cls, shift: Number) -> "MoebiusMap":
        return cls(1 + 0j, complex(shift), 0j, 1 + 0j)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """Return self ∘ other."""
        return MoebiusMap.from_entries(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return self.compose(other)

    def conjugate_by(self, h: "MoebiusMap") -> "MoebiusMap":
        """Return h ∘ self ∘ h⁻¹."""
        return h.compose(self).compose(h.inverse())

    def isclose(self, other: "MoebiusMap", tol: Optional[float] = None) -> bool:
        """Entrywise comparison up to the sign ambiguity of PSL₂(C)."""
        tol = get_tolerances().algebraic if tol is None else tol
        mine, theirs = self.matrix, other.matrix
        return bool(np.max(np.abs(mine - theirs)) <= tol or np.max(np.abs(mine + theirs)) <= tol)

    def is_real(self, tol: Optional[float] = None) -> bool:
        tol = get_tolerances().geometric if tol is None else tol
        entries = self.matrix
        if np.max(np.abs(entries.imag)) <= tol:
            return True
        return bool(np.max(np.abs(entries.real)) <= tol)

    def act(self, z: Any) -> Any:
        """Vectorized action on finite complex values (numpy arrays or scalars)."""
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z: Any) -> Any:
        z = np.asarray(z, dtype=complex)
        return 1.0 / (self.c * z + self.d) ** 2

    def to_json(self) -> List[List[float]]:
        return [[float(v.real), float(v.imag)] for v in (self.a, self.b, self.c, self.d)]

    @classmethod
    def from_json(cls, payload: Any) -> "MoebiusMap":
        """Read four [re, im] entries, or a 2x2 nested list of numbers or pairs."""
        if isinstance(payload, dict):
            return cls.from_entries(*(_coerce_complex(payload[k]) for k in ("a", "b", "c", "d")))
        items = list(payload)
        if len(items) == 2 and all(isinstance(row, (list, tuple)) and len(row) == 2 for row in items):
            rows = [[_coerce_complex(v) for v in row] for row in items]
            return cls.from_entries(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
        if len(items) != 4:
            raise DegenerateError(f"expected four matrix entries, got {len(items)}")
        return cls.from_entries(*(_coerce_complex(v) for v in items))


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A point of the Riemann sphere: a complex number or the point at infinity."""

    value: complex = 0j
    infinite: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", 0j if self.infinite else complex(self.value))

    @classmethod
    def finite(cls, z: Number) -> "SpherePoint":
        return cls(complex(z), False)

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(0j, True)

    @classmethod
    def coerce(cls, raw: Any) -> "SpherePoint":
        if isinstance(raw, SpherePoint):
            return raw
        if raw is None or (isinstance(raw, str) and raw.lower() in {"inf", "infinity", "∞"}):
            return cls.infinity()
        z = _coerce_complex(raw)
        if cmath.isinf(z):
            return cls.infinity()
        return cls.finite(z)

    def chordal_distance(self, other: "SpherePoint") -> float:
        return chordal_distance(self, other)

    def isclose(self, other: "SpherePoint", tol: Optional[float] = None) -> bool:
        tol = get_tolerances().geometric if tol is None else tol
        return chordal_distance(self, other) <= tol

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpherePoint):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return "SpherePoint(∞)" if self.infinite else f"SpherePoint({self.value!r})"


def chordal_distance(p: SpherePoint, q: SpherePoint) -> float:
    """Chordal distance on the unit sphere, in [0, 2]."""
    if p.infinite and q.infinite:
        return 0.0
    if p.infinite or q.infinite:
        z = q.value if p.infinite else p.value
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    z, w = p.value, q.value
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


@dataclass(frozen=True)
class CircleOnSphere:
    """The circle A|z|² + 2Re(B̄z) + D = 0; A = 0 gives a line."""

    A: float
    B: complex
    D: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", float(self.A))
        object.__setattr__(self, "B", complex(self.B))
        object.__setattr__(self, "D", float(self.D))
        # relative to the terms that cancel in |B|² − AD, so the radius scale does not matter
        magnitude = max(abs(self.B) ** 2 + abs(self.A * self.D), 1e-300)
        if self.discriminant <= get_tolerances().algebraic * magnitude:
            raise DegenerateError(
                f"circle coefficients ({self.A}, {self.B}, {self.D}) describe a point or the empty set"
            )

    @classmethod
    def from_center_radius(cls, center: Number, radius: float) -> "CircleOnSphere":
        if radius <= 0:
            raise DegenerateError("circle radius must be positive")
        c = complex(center)
        return cls(1.0, -c, abs(c) ** 2 - radius * radius)

    @classmethod
    def line(cls, point: Number, direction: Number) -> "CircleOnSphere":
        """The line through `point` with direction `direction`."""
        u = complex(direction)
        if abs(u) == 0:
            raise DegenerateError("line direction must be nonzero")
        u = u / abs(u)
        p = complex(point)
        return cls(0.0, 1j * u / 2.0, -(u.conjugate() * p).imag)

    @classmethod
    def from_json(cls, payload: Any) -> "CircleOnSphere":
        if isinstance(payload, dict):
            if "center" in payload:
                return cls.from_center_radius(_coerce_complex(payload["center"]), float(payload["radius"]))
            return cls(float(payload["A"]), _coerce_complex(payload["B"]), float(payload["D"]))
        A, B, D = payload
        return cls(float(A), _coerce_complex(B), float(D))

    def to_json(self) -> List[Any]:
        return [self.A, [self.B.real, self.B.imag], self.D]

    @property
    def hermitian(self) -> np.ndarray:
        return np.array([[self.A, self.B], [self.B.conjugate(), self.D]], dtype=complex)

    @property
    def discriminant(self) -> float:
        """|B|² − AD, positive for a genuine circle."""
        return abs(self.B) ** 2 - self.A * self.D

    def is_line(self, tol: Optional[float] = None) -> bool:
        tol = get_tolerances().algebraic if tol is None else tol
        return abs(self.A) <= tol * math.sqrt(self.discriminant)

    def center_radius(self) -> Tuple[complex, float]:
        if self.is_line():
            raise DegenerateError("a line has no finite center")
        return -self.B / self.A, math.sqrt(self.discriminant) / abs(self.A)

    def evaluate(self, z: Any) -> Any:
        z = np.asarray(z, dtype=complex)
        return self.A * np.abs(z) ** 2 + 2.0 * (np.conj(self.B) * z).real + self.D

    def normalized(self) -> np.ndarray:
        """Coefficients (A, Re B, Im B, D)/√Δ with a fixed overall sign."""
        vec = np.array([self.A, self.B.real, self.B.imag, self.D]) / math.sqrt(self.discriminant)
        pivot = vec[np.argmax(np.abs(vec))]
        return vec if pivot > 0 else -vec

    def coefficient_distance(self, other: "CircleOnSphere") -> float:
        return float(np.max(np.abs(self.normalized() - other.normalized())))

    def sample(self, n: int = 64) -> np.ndarray:
        """n finite points on the circle (a line is sampled through a stereographic sweep)."""
        theta = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        if not self.is_line():
            center, radius = self.center_radius()
            return center + radius * np.exp(1j * theta)
        u = -2j * self.B
        u = u / abs(u)
        base = -self.D * self.B / (2.0 * abs(self.B) ** 2)
        return base + u * np.tan((theta - np.pi) / 2.0)


@dataclass(frozen=True)
class H3Point:
    x: float
    y: float
    h: float

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise DegenerateError(f"H3 point height must be positive, got {self.h}")

    @property
    def base(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_base(cls, w: complex, h: float) -> "H3Point":
        return cls(float(w.real), float(w.imag), float(h))


@dataclass(frozen=True)
class H2Point:
    x: float
    h: float

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise DegenerateError(f"H2 point height must be positive, got {self.h}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.h)


@dataclass(frozen=True)
class GeodesicH3:
    """Oriented geodesic of H³ from `start` to `end`."""

    start: SpherePoint
    end: SpherePoint

    def __post_init__(self) -> None:
        if self.start.isclose(self.end):
            raise DegenerateError("geodesic endpoints coincide")

    def reversed(self) -> "GeodesicH3":
        return GeodesicH3(self.end, self.start)


@dataclass(frozen=True)
class GeodesicH2:
    """Oriented geodesic of H² with endpoints on the extended real line."""

    start: SpherePoint
    end: SpherePoint

    def __post_init__(self) -> None:
        tol = get_tolerances().geometric
        for endpoint in (self.start, self.end):
            if not endpoint.infinite and abs(endpoint.value.imag) > tol:
                raise DegenerateError("H2 geodesic endpoints must be real or ∞")
        if self.start.isclose(self.end):
            raise DegenerateError("geodesic endpoints coincide")

    @classmethod
    def between(cls, start: Optional[float], end: Optional[float]) -> "GeodesicH2":
        """None or ±inf stand for ∞."""
        return cls(SpherePoint.coerce(start), SpherePoint.coerce(end))


@dataclass(frozen=True)
class HyperbolicPlaneH3:
    boundary: CircleOnSphere


GeodesicLike = Union[GeodesicH3, GeodesicH2]


def classify(g: MoebiusMap) -> MapType:
    tol = get_tolerances()
    if g.isclose(MoebiusMap.identity(), tol.algebraic):
        return MapType.IDENTITY
    tr2 = g.trace ** 2
    if abs(tr2 - 4) <= tol.parabolic:
        return MapType.PARABOLIC
    if abs(tr2.imag) <= tol.parabolic and -tol.parabolic <= tr2.real < 4:
        return MapType.ELLIPTIC
    return MapType.LOXODROMIC


def _require_loxodromic(g: MoebiusMap) -> None:
    kind = classify(g)
    if kind is not MapType.LOXODROMIC:
        raise NotLoxodromicError(f"map is {kind.value}, not loxodromic")


def multiplier(g: MoebiusMap) -> complex:
    """The eigenvalue λ of larger modulus; g is conjugate to z ↦ λ² z."""
    tr = g.trace
    root = cmath.sqrt(tr * tr - 4)
    first, second = (tr + root) / 2, (tr - root) / 2
    return first if abs(first) >= abs(second) else second


def translation_length(g: MoebiusMap) -> float:
    """Real translation distance along the axis, 2·log|λ|."""
    _require_loxodromic(g)
    return 2.0 * math.log(abs(multiplier(g)))


def fixed_points(g: MoebiusMap) -> Tuple[SpherePoint, SpherePoint]:
    """Fixed points ordered (repelling, attracting); a parabolic map repeats its point."""
    if classify(g) is MapType.IDENTITY:
        raise IdentityMapError("the identity fixes every point")
    a, b, c, d = g.a, g.b, g.c, g.d
    scale = max(abs(a), abs(b), abs(c), abs(d))
    tol = get_tolerances().algebraic
    if abs(c) <= tol * scale:
        infinity = SpherePoint.infinity()
        if abs(d - a) <= tol * scale:
            return infinity, infinity
        finite = SpherePoint.finite(b / (d - a))
        # the multiplier at ∞ is d/a
        if abs(d / a) < 1:
            return finite, infinity
        return infinity, finite
    disc = cmath.sqrt((a - d) ** 2 + 4 * b * c)
    roots = [((a - d) + disc) / (2 * c), ((a - d) - disc) / (2 * c)]
    roots.sort(key=lambda z: abs(c * z + d), reverse=False)
    # |g'(z)| = 1/|cz + d|², so the smaller |cz + d| is repelling
    return SpherePoint.finite(roots[0]), SpherePoint.finite(roots[1])


def axis(g: MoebiusMap) -> GeodesicH3:
    _require_loxodromic(g)
    repelling, attracting = fixed_points(g)
    return GeodesicH3(repelling, attracting)


def dist_h3(p: H3Point, q: H3Point) -> float:
    chord = math.sqrt((p.x - q.x) ** 2 + (p.y - q.y) ** 2 + (p.h - q.h) ** 2)
    return 2.0 * math.asinh(chord / (2.0 * math.sqrt(p.h * q.h)))


def dist_h2(p: H2Point, q: H2Point) -> float:
    chord = math.hypot(p.x - q.x, p.h - q.h)
    return 2.0 * math.asinh(chord / (2.0 * math.sqrt(p.h * q.h)))


def _apply_sphere(g: MoebiusMap, p: SpherePoint) -> SpherePoint:
    if p.infinite:
        if abs(g.c) == 0:
            return SpherePoint.infinity()
        return SpherePoint.finite(g.a / g.c)
    z = p.value
    den = g.c * z + g.d
    if abs(den) <= 1e-15 * (abs(g.c * z) + abs(g.d)):
        return SpherePoint.infinity()
    return SpherePoint.finite((g.a * z + g.b) / den)


def _apply_circle(g: MoebiusMap, circle: CircleOnSphere) -> CircleOnSphere:
    inv = g.inverse().matrix
    image = inv.conj().T @ circle.hermitian @ inv
    return CircleOnSphere(image[0, 0].real, image[0, 1], image[1, 1].real)


def _invert_h3(w: complex, h: float) -> Tuple[complex, float]:
    """Extension of z ↦ −1/z to upper half-space."""
    norm = abs(w) ** 2 + h * h
    return -w.conjugate() / norm, h / norm


def _apply_h3(g: MoebiusMap, p: H3Point) -> H3Point:
    w, h = p.base, p.h
    scale = max(abs(g.a), abs(g.b), abs(g.c), abs(g.d))
    if abs(g.c) <= get_tolerances().algebraic * scale:
        ratio = g.a / g.d
        return H3Point.from_base(ratio * w + g.b / g.d, abs(ratio) * h)
    w = w + g.d / g.c
    c2 = g.c * g.c
    w, h = c2 * w, abs(c2) * h
    w, h = _invert_h3(w, h)
    w = w + g.a / g.c
    return H3Point.from_base(w, h)


def apply(g: MoebiusMap, x: Any) -> Any:
    """Act on sphere points, circles, planes, geodesics and points of H² or H³."""
    if isinstance(x, SpherePoint):
        return _apply_sphere(g, x)
    if isinstance(x, CircleOnSphere):
        return _apply_circle(g, x)
    if isinstance(x, HyperbolicPlaneH3):
        return HyperbolicPlaneH3(_apply_circle(g, x.boundary))
    if isinstance(x, H3Point):
        return _apply_h3(g, x)
    if isinstance(x, H2Point):
        image = _apply_h3(g, H3Point(x.x, 0.0, x.h))
        return H2Point(image.x, image.h)
    if isinstance(x, GeodesicH3):
        return GeodesicH3(_apply_sphere(g, x.start), _apply_sphere(g, x.end))
    if isinstance(x, GeodesicH2):
        return GeodesicH2(_apply_sphere(g, x.start), _apply_sphere(g, x.end))
    if isinstance(x, (int, float, complex)):
        return _apply_sphere(g, SpherePoint.finite(x))
    raise TypeError(f"cannot apply a Möbius map to {type(x).__name__}")


def inversive_product(c1: CircleOnSphere, c2: CircleOnSphere) -> float:
    """Signed inversive product; |I| > 1 iff the circles are disjoint, |I| = cosh(plane distance)."""
    num = (c1.B * c2.B.conjugate() + c1.B.conjugate() * c2.B).real - c1.A * c2.D - c2.A * c1.D
    return num / (2.0 * math.sqrt(c1.discriminant * c2.discriminant))


def plane_distance(first: HyperbolicPlaneH3, second: HyperbolicPlaneH3) -> float:
    product = abs(inversive_product(first.boundary, second.boundary))
    if product <= 1.0 + get_tolerances().geometric:
        raise CirclesIntersectError(f"boundary circles meet (|inversive product| = {product:.12g})")
    return math.acosh(product)


def _kernel_point(h: np.ndarray) -> SpherePoint:
    """The sphere point represented by a rank-one Hermitian form."""
    rows = [h[0], h[1]]
    row = max(rows, key=lambda r: float(np.linalg.norm(r)))
    u, v = -row[1], row[0]
    if abs(v) <= 1e-12 * abs(u):
        return SpherePoint.infinity()
    return SpherePoint.finite(u / v)


def limit_points(c1: CircleOnSphere, c2: CircleOnSphere) -> Tuple[SpherePoint, SpherePoint]:
    """Common inverse points of two disjoint circles: the ends of their common perpendicular.

    The first point lies on the side of `c1`, the second on the side of `c2`.
    """
    product = inversive_product(c1, c2)
    if abs(product) <= 1.0 + get_tolerances().geometric:
        raise CirclesIntersectError("limit points exist only for disjoint circles")
    ratio = math.sqrt(c1.discriminant / c2.discriminant)
    spread = math.sqrt(product * product - 1.0)
    points = []
    for lam in (ratio * (product - spread), ratio * (product + spread)):
        points.append(_kernel_point(c1.hermitian - lam * c2.hermitian))
    first, second = points
    # c1 separates its own limit point from c2
    reference = float(c1.evaluate(c2.sample(1)[0]))
    if _form_value(c1, first) * reference > 0:
        first, second = second, first
    return first, second


def _form_value(circle: CircleOnSphere, p: SpherePoint) -> float:
    if p.infinite:
        return circle.A
    return float(circle.evaluate(p.value))


def normalizing_map(zero: Any, infinity: Any) -> MoebiusMap:
    """A Möbius map sending `zero` to 0 and `infinity` to ∞."""
    p, q = SpherePoint.coerce(zero), SpherePoint.coerce(infinity)
    if p.isclose(q):
        raise DegenerateError("cannot separate coincident points")
    if p.infinite:
        return MoebiusMap.from_entries(0, 1, 1, -q.value)
    if q.infinite:
        return MoebiusMap.from_entries(1, -p.value, 0, 1)
    return MoebiusMap.from_entries(1, -p.value, 1, -q.value)


def translation_along(geodesic: GeodesicH3, distance: float) -> MoebiusMap:
    """Pure translation by `distance` along `geodesic`, towards its end."""
    w = normalizing_map(geodesic.start, geodesic.end)
    half = math.exp(distance / 2.0)
    return w.inverse().compose(MoebiusMap.from_entries(half, 0, 0, 1.0 / half)).compose(w)


def geodesic_through(p: H3Point, q: H3Point) -> GeodesicH3:
    """The geodesic through p and q, oriented from p towards q."""
    offset = q.base - p.base
    length = abs(offset)
    if length <= get_tolerances().geometric * max(p.h, q.h):
        base = SpherePoint.finite(p.base)
        if q.h > p.h:
            return GeodesicH3(base, SpherePoint.infinity())
        return GeodesicH3(SpherePoint.infinity(), base)
    unit = offset / length
    centre = (length ** 2 + q.h ** 2 - p.h ** 2) / (2.0 * length)
    radius = math.sqrt(centre ** 2 + p.h ** 2)
    return GeodesicH3(
        SpherePoint.finite(p.base + (centre - radius) * unit),
        SpherePoint.finite(p.base + (centre + radius) * unit),
    )


def point_on_geodesic(geodesic: GeodesicH3, height: float = 1.0) -> H3Point:
    """The image of (0, 0, height) under the map sending (0, ∞) to the geodesic."""
    w = normalizing_map(geodesic.start, geodesic.end)
    return apply(w.inverse(), H3Point(0.0, 0.0, height))


def _hyperboloid(p: H2Point) -> np.ndarray:
    r2 = p.x * p.x + p.h * p.h
    return np.array([(r2 + 1.0) / (2.0 * p.h), p.x / p.h, (r2 - 1.0) / (2.0 * p.h)])


def h2_geodesic_point(p: H2Point, q: H2Point, fraction: float) -> H2Point:
    """The point at `fraction` of the way from p to q along their geodesic segment."""
    length = dist_h2(p, q)
    if length <= get_tolerances().algebraic:
        return p
    vec = (math.sinh((1.0 - fraction) * length) * _hyperboloid(p) + math.sinh(fraction * length) * _hyperboloid(q))
    vec = vec / math.sinh(length)
    h = 1.0 / (vec[0] - vec[2])
    return H2Point(float(vec[1] * h), float(h))


def _as_sphere_pair(geodesic: GeodesicLike) -> Tuple[SpherePoint, SpherePoint]:
    return geodesic.start, geodesic.end


def angle_between_geodesics(first: GeodesicLike, second: GeodesicLike) -> float:
    """Angle in [0, π/2] at the common interior point of two geodesics (H² or H³)."""
    s1, e1 = _as_sphere_pair(first)
    s2, e2 = _as_sphere_pair(second)
    if (s1.isclose(s2) and e1.isclose(e2)) or (s1.isclose(e2) and e1.isclose(s2)):
        return 0.0
    w = normalizing_map(s1, e1)
    u, v = _apply_sphere(w, s2), _apply_sphere(w, e2)
    tol = get_tolerances().geometric
    for endpoint in (u, v):
        if endpoint.infinite or abs(endpoint.value) <= tol:
            raise DisjointError("geodesics share only an ideal endpoint")
    ratio = u.value / v.value
    if ratio.real >= 0 or abs(ratio.imag) > tol * abs(ratio):
        raise DisjointError("geodesics do not meet")
    centre = abs((u.value + v.value) / 2.0)
    radius = abs(u.value - v.value) / 2.0
    angle = math.acos(min(1.0, centre / radius))
    LOGGER.debug("Geodesic angle %.12g", angle)
    return angle
