"""Round cylinders, their canonical log charts, supported rectangles and the maps between them.

Chart coordinates are (s, v) with s = Re ζ across the cylinder and v = Im ζ along the
vertical circles, ζ = log N(z) for the cylinder's normalizing map N. Rectangles live on the
universal cover of the chart, so v is not reduced modulo 2π.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from graftlab.distortion import (
    ChartDomain,
    SamplerConfig,
    estimate_distortion,
    jacobians,
    sup_displacement,
)
from graftlab.errors import (
    CirclesIntersectError,
    DegenerateCoreError,
    DegenerateError,
    NotAdjacentError,
)
from graftlab.models import DistortionEstimate, NearnessParams
from graftlab.moebius_core import (
    CircleOnSphere,
    GeodesicH3,
    H2Point,
    H3Point,
    MoebiusMap,
    SpherePoint,
    apply,
    chordal_distance,
    dist_h2,
    dist_h3,
    geodesic_through,
    h2_geodesic_point,
    inversive_product,
    limit_points,
    normalizing_map,
    translation_along,
)
from graftlab.settings import get_tolerances

LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_NODES = 64
MIN_NODES = 16
XI_STREAM = 11
ETA_STREAM = 12


def _wrap(angle: Any) -> Any:
    """Reduce angles to (−π, π]."""
    return np.pi - np.mod(np.pi - np.asarray(angle, dtype=float), TWO_PI)


def _log_derivative_matrix(d: np.ndarray) -> np.ndarray:
    """Real 2x2 matrices of multiplication by the complex numbers d."""
    out = np.empty((len(d), 2, 2))
    out[:, 0, 0] = d.real
    out[:, 0, 1] = -d.imag
    out[:, 1, 0] = d.imag
    out[:, 1, 1] = d.real
    return out


@dataclass(frozen=True)
class ChartTransition:
    """ζ' = sign·ζ + shift between charts of concentric cylinders."""

    sign: int
    shift: complex

    def __call__(self, points: np.ndarray) -> np.ndarray:
        zeta = self.sign * (points[:, 0] + 1j * points[:, 1]) + self.shift
        return np.column_stack([zeta.real, zeta.imag])


@dataclass(frozen=True)
class LogChart:
    normalizer: MoebiusMap
    core_length: float

    def to_chart(self, z: Any) -> np.ndarray:
        zeta = np.log(self.normalizer.act(np.atleast_1d(z)))
        return np.column_stack([zeta.real, zeta.imag])

    def from_chart(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return self.normalizer.inverse().act(np.exp(points[:, 0] + 1j * points[:, 1]))

    def vertical_circle(self, s: float, count: int = 256) -> np.ndarray:
        v = np.linspace(0.0, TWO_PI, count + 1)
        return np.column_stack([np.full_like(v, s), v])

    @staticmethod
    def flat_length(points: np.ndarray) -> float:
        return float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=1)))

    def transition(self, other: "LogChart") -> ChartTransition:
        """Chart change to a concentric cylinder's chart."""
        t = other.normalizer.compose(self.normalizer.inverse())
        scale = max(abs(t.a), abs(t.b), abs(t.c), abs(t.d))
        tol = get_tolerances().adjacency * scale
        if abs(t.b) <= tol and abs(t.c) <= tol:
            return ChartTransition(1, complex(np.log(t.a / t.d)))
        if abs(t.a) <= tol and abs(t.d) <= tol:
            return ChartTransition(-1, complex(np.log(t.b / t.c)))
        raise NotAdjacentError("charts belong to cylinders that are not concentric")


@dataclass(frozen=True)
class RoundCylinder:
    """The region between two disjoint circles; `inner` maps to |z| = 1 in the chart."""

    inner: CircleOnSphere
    outer: CircleOnSphere
    normalizer: MoebiusMap
    core_length: float
    axis: GeodesicH3

    @property
    def modulus(self) -> float:
        return self.core_length / TWO_PI

    @property
    def chart(self) -> LogChart:
        return LogChart(self.normalizer, self.core_length)

    @property
    def core_endpoints(self) -> Tuple[H3Point, H3Point]:
        back = self.normalizer.inverse()
        return (
            apply(back, H3Point(0.0, 0.0, 1.0)),
            apply(back, H3Point(0.0, 0.0, math.exp(self.core_length))),
        )

    def side_of(self, circle: CircleOnSphere) -> Optional[int]:
        """0 for the inner boundary, 1 for the outer, None otherwise."""
        tol = get_tolerances().adjacency
        if self.inner.coefficient_distance(circle) < tol:
            return 0
        if self.outer.coefficient_distance(circle) < tol:
            return 1
        return None

    def core_endpoint_on(self, circle: CircleOnSphere) -> H3Point:
        side = self.side_of(circle)
        if side is None:
            raise NotAdjacentError("circle is not a boundary of this cylinder")
        return self.core_endpoints[side]

    def shared_circle(self, other: "RoundCylinder") -> Tuple[int, int]:
        """Sides (of self, of other) carrying the common boundary circle."""
        for mine, circle in ((0, self.inner), (1, self.outer)):
            theirs = other.side_of(circle)
            if theirs is not None:
                return mine, theirs
        raise NotAdjacentError("cylinders share no boundary circle")

    def moved_by(self, g: MoebiusMap) -> "RoundCylinder":
        return make_cylinder(apply(g, self.inner), apply(g, self.outer))


def make_cylinder(c1: CircleOnSphere, c2: CircleOnSphere) -> RoundCylinder:
    product = abs(inversive_product(c1, c2))
    if product <= 1.0 + get_tolerances().geometric:
        raise CirclesIntersectError("cylinder boundary circles must be disjoint")
    p, q = limit_points(c1, c2)
    base = normalizing_map(p, q)
    if not p.infinite and not q.infinite:
        # (z − p)/(z − q) shrinks circles by about |p − q|
        base = MoebiusMap.diagonal(abs(q.value - p.value)).compose(base)
    _, radius = apply(base, c1).center_radius()
    normalizer = MoebiusMap.diagonal(1.0 / radius).compose(base)
    core = math.acosh(product)
    return RoundCylinder(c1, c2, normalizer, core, GeodesicH3(p, q))


def concentric_cylinder(r1: float, r2: float) -> RoundCylinder:
    """{r1 ≤ |z| ≤ r2}."""
    return make_cylinder(CircleOnSphere.from_center_radius(0, r1), CircleOnSphere.from_center_radius(0, r2))


@dataclass(frozen=True)
class EdgeProfile:
    """Unit shape of the two horizontal edges; amplitudes are scaled by δ/4 when used."""

    bottom_amp: float = 0.0
    bottom_freq: int = 1
    bottom_phase: float = 0.0
    top_amp: float = 0.0
    top_freq: int = 1
    top_phase: float = 0.0

    @classmethod
    def draw(cls, rng: np.random.Generator) -> "EdgeProfile":
        amps = rng.uniform(0.5, 1.0, 2)
        freqs = rng.integers(1, 3, 2)
        phases = rng.uniform(0.0, TWO_PI, 2)
        return cls(float(amps[0]), int(freqs[0]), float(phases[0]), float(amps[1]), int(freqs[1]), float(phases[1]))


@dataclass(frozen=True, eq=False)
class SupportedRectangle:
    """A rectangle in a host chart: piecewise-linear horizontal edges over [0, c]."""

    host: RoundCylinder
    nodes: np.ndarray
    bottom_values: np.ndarray
    top_values: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        bottom = np.asarray(self.bottom_values, dtype=float)
        top = np.asarray(self.top_values, dtype=float)
        if nodes.ndim != 1 or len(nodes) < MIN_NODES:
            raise DegenerateError(f"rectangles need at least {MIN_NODES} edge nodes")
        if bottom.shape != nodes.shape or top.shape != nodes.shape:
            raise DegenerateError("edge values must match the nodes")
        if np.any(np.diff(nodes) <= 0):
            raise DegenerateError("edge nodes must be increasing")
        tol = get_tolerances().geometric * max(1.0, self.host.core_length)
        if abs(nodes[0]) > tol or abs(nodes[-1] - self.host.core_length) > tol:
            raise DegenerateError("edge nodes must span the host core [0, c]")
        if not np.all(np.isfinite(bottom)) or not np.all(np.isfinite(top)):
            raise DegenerateError("edge values must be finite")
        if np.any(top - bottom <= 0):
            raise DegenerateError("top edge must lie above the bottom edge")
        for arr in (nodes, bottom, top):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "bottom_values", bottom)
        object.__setattr__(self, "top_values", top)

    @property
    def width(self) -> float:
        return self.host.core_length

    @property
    def chart(self) -> LogChart:
        return self.host.chart

    def bottom(self, u: Any) -> np.ndarray:
        return np.interp(u, self.nodes, self.bottom_values)

    def top(self, u: Any) -> np.ndarray:
        return np.interp(u, self.nodes, self.top_values)

    def leaf_length(self, u: Any) -> np.ndarray:
        return self.top(u) - self.bottom(u)

    def slopes(self) -> Tuple[np.ndarray, np.ndarray]:
        spacing = np.diff(self.nodes)
        return np.diff(self.bottom_values) / spacing, np.diff(self.top_values) / spacing

    def min_leaf_length(self) -> float:
        return float(np.min(self.top_values - self.bottom_values))


def make_circular_rectangle(host: RoundCylinder, height: float, base: float = 0.0, n: int = DEFAULT_NODES) -> SupportedRectangle:
    nodes = np.linspace(0.0, host.core_length, n)
    return SupportedRectangle(host, nodes, np.full(n, float(base)), np.full(n, float(base + height)))


def perturbed_rectangle(
    host: RoundCylinder,
    leaf_length: float,
    delta: float,
    profile: EdgeProfile,
    n: int = DEFAULT_NODES,
) -> SupportedRectangle:
    """Sinusoidal edges of amplitude ≤ δ/4 around 0 and `leaf_length`."""
    c = host.core_length
    nodes = np.linspace(0.0, c, n)
    amp = delta / 4.0
    bottom = amp * profile.bottom_amp * np.sin(TWO_PI * profile.bottom_freq * nodes / c + profile.bottom_phase)
    top = leaf_length + amp * profile.top_amp * np.sin(TWO_PI * profile.top_freq * nodes / c + profile.top_phase)
    return SupportedRectangle(host, nodes, bottom, top)


@dataclass(frozen=True)
class RectangleDomain:
    """Samples a rectangle away from edge-graph nodes."""

    rectangle: SupportedRectangle
    margin: float = 0.02

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        nodes = self.rectangle.nodes
        segment = rng.integers(0, len(nodes) - 1, count)
        frac = rng.uniform(self.margin, 1.0 - self.margin, count)
        u = nodes[segment] + frac * (nodes[segment + 1] - nodes[segment])
        height = rng.uniform(0.0, 1.0, count)
        v = self.rectangle.bottom(u) + height * self.rectangle.leaf_length(u)
        return np.column_stack([u, v])

    def local_scale(self, points: np.ndarray) -> np.ndarray:
        return np.full(len(points), self.rectangle.width)


@dataclass
class CircularityReport:
    ok: bool
    core_length: float
    oscillation: float
    max_slope: float
    reasons: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def is_nearly_circular(rectangle: SupportedRectangle, params: NearnessParams) -> CircularityReport:
    bottom_slopes, top_slopes = rectangle.slopes()
    oscillation = max(float(np.ptp(rectangle.bottom_values)), float(np.ptp(rectangle.top_values)))
    max_slope = float(max(np.max(np.abs(bottom_slopes)), np.max(np.abs(top_slopes))))
    reasons = []
    if rectangle.width < params.K:
        reasons.append(f"core length {rectangle.width:.6g} below K={params.K:.6g}")
    if oscillation > params.eps:
        reasons.append(f"edge oscillation {oscillation:.6g} exceeds eps={params.eps:.6g}")
    if max_slope > math.tan(params.eps):
        reasons.append(f"edge slope {max_slope:.6g} exceeds tan(eps)")
    return CircularityReport(not reasons, rectangle.width, oscillation, max_slope, reasons)


def core_offset(first: RoundCylinder, second: RoundCylinder) -> float:
    """Distance between the two core endpoints on the shared boundary plane."""
    side1, side2 = first.shared_circle(second)
    return dist_h3(first.core_endpoints[side1], second.core_endpoints[side2])


def is_nearly_concentric(first: RoundCylinder, second: RoundCylinder, eps: float) -> bool:
    return core_offset(first, second) < eps


@dataclass(frozen=True)
class GeodesicQuad:
    bottom_left: H2Point
    bottom_right: H2Point
    top_right: H2Point
    top_left: H2Point


@dataclass
class StraightnessReport:
    ok: bool
    width: float
    height: float
    defect: float

    def __bool__(self) -> bool:
        return self.ok


def _pairwise_h2(points: np.ndarray) -> np.ndarray:
    dx = points[:, None, 0] - points[None, :, 0]
    dh = points[:, None, 1] - points[None, :, 1]
    heights = np.sqrt(points[:, None, 1] * points[None, :, 1])
    return 2.0 * np.arcsinh(np.hypot(dx, dh) / (2.0 * heights))


def quad_grid(quad: GeodesicQuad, samples: int) -> np.ndarray:
    """Grid points (x, h) indexed [i along the bottom edge, j up the leaf]."""
    fractions = np.linspace(0.0, 1.0, samples)
    grid = np.empty((samples, samples, 2))
    for i, s in enumerate(fractions):
        low = h2_geodesic_point(quad.bottom_left, quad.bottom_right, s)
        high = h2_geodesic_point(quad.top_left, quad.top_right, s)
        for j, r in enumerate(fractions):
            point = h2_geodesic_point(low, high, r)
            grid[i, j] = (point.x, point.h)
    return grid


def is_nearly_straight_branch(quad: GeodesicQuad, eps: float, w: float, samples: int = 12) -> StraightnessReport:
    """Compare the quad with the Euclidean rectangle of matching width and height."""
    corners = [quad.bottom_left, quad.bottom_right, quad.top_right, quad.top_left]
    tol = get_tolerances().geometric
    for i in range(4):
        for j in range(i + 1, 4):
            if dist_h2(corners[i], corners[j]) <= tol:
                raise DegenerateError("quadrilateral has coincident vertices")
    fractions = np.linspace(0.0, 1.0, 33)
    left = np.array([[p.x, p.h] for p in (h2_geodesic_point(quad.bottom_left, quad.top_left, f) for f in fractions)])
    right = np.array([[p.x, p.h] for p in (h2_geodesic_point(quad.bottom_right, quad.top_right, f) for f in fractions)])
    width = float(np.min(_pairwise_h2(np.concatenate([left, right]))[: len(left), len(left):]))
    height = max(dist_h2(quad.bottom_left, quad.top_left), dist_h2(quad.bottom_right, quad.top_right))
    if width <= tol or height <= tol:
        raise DegenerateError("quadrilateral collapses to a segment")
    grid = quad_grid(quad, samples)
    frac = np.linspace(0.0, 1.0, samples)
    euclid = np.stack(np.meshgrid(frac * width, frac * height, indexing="ij"), axis=-1).reshape(-1, 2)
    hyperbolic = _pairwise_h2(grid.reshape(-1, 2))
    flat = np.linalg.norm(euclid[:, None, :] - euclid[None, :, :], axis=-1)
    defect = float(np.max(np.abs(hyperbolic - flat)))
    ok = defect <= 1.0 + eps and width >= w
    return StraightnessReport(ok, width, height, defect)


@dataclass(frozen=True)
class XiMap:
    """Linear across leaves (u ↦ u·c′/c), affine along each vertical leaf."""

    source: SupportedRectangle
    target: SupportedRectangle

    @property
    def ratio(self) -> float:
        if self.source is self.target:
            return 1.0
        return self.target.width / self.source.width

    def __call__(self, points: np.ndarray) -> np.ndarray:
        u, v = points[:, 0], points[:, 1]
        u_image = u * self.ratio
        low, high = self.source.bottom(u), self.source.top(u)
        height = (v - low) / (high - low)
        v_image = v + (self.target.bottom(u_image) - low) * (1.0 - height) + (self.target.top(u_image) - high) * height
        return np.column_stack([u_image, v_image])

    def inverse(self) -> "XiMap":
        return XiMap(self.target, self.source)


def xi_map(source: SupportedRectangle, target: SupportedRectangle) -> XiMap:
    return XiMap(source, target)


@dataclass(frozen=True)
class EtaMap:
    """Concentric correction on a host chart: leaf-preserving rotation of each circle.

    The circle at s is moved by the translation of its hyperbolic plane along the geodesic
    with ends ±e^s·u, by distance·2t/w where t = w/2 − |s − shared_s|; nothing moves for t ≤ 0.
    """

    chart: LogChart
    shared_s: float
    width: float
    distance: float
    direction: complex = 1 + 0j

    @property
    def is_identity(self) -> bool:
        return self.distance == 0.0

    def tau(self, s: np.ndarray) -> np.ndarray:
        t = self.width / 2.0 - np.abs(s - self.shared_s)
        return np.where(t > 0, self.distance * 2.0 * t / self.width, 0.0)

    def _move(self, points: np.ndarray, sign: float) -> np.ndarray:
        out = np.array(points, dtype=float, copy=True)
        if self.is_identity:
            return out
        s, v = out[:, 0], out[:, 1]
        tau = sign * self.tau(s)
        active = tau != 0
        if np.any(active):
            z = np.exp(s[active] + 1j * v[active])
            a = np.exp(s[active]) * self.direction
            stretched = np.exp(tau[active]) * (z + a) / (a - z)
            image = a * (stretched - 1.0) / (stretched + 1.0)
            out[active, 1] = v[active] + np.angle(image / z)
        return out

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self._move(points, 1.0)

    def inverse(self, points: np.ndarray) -> np.ndarray:
        return self._move(points, -1.0)

    def on_sphere(self, z: Any) -> np.ndarray:
        return self.chart.from_chart(self(self.chart.to_chart(z)))


@dataclass(frozen=True)
class ConcentricAdjustment:
    gamma: MoebiusMap
    eta: EtaMap
    adjusted: RoundCylinder
    offset: float
    shared: CircleOnSphere

    def __iter__(self):
        return iter((self.gamma, self.eta, self.adjusted))


def adjacent_offset_cylinder(host: RoundCylinder, core_length: float, offset: float, direction: float = 0.0) -> RoundCylinder:
    """A cylinder glued to host.outer whose core endpoint there is `offset` away from host's."""
    if not core_length > 0:
        raise DegenerateCoreError("core length must be positive")
    radius = math.exp(host.core_length)
    far = CircleOnSphere.from_center_radius(0, radius * math.exp(core_length))
    if offset > 0:
        u = complex(math.cos(direction), math.sin(direction))
        shift = translation_along(GeodesicH3(SpherePoint.finite(-radius * u), SpherePoint.finite(radius * u)), offset)
        far = apply(shift, far)
    return make_cylinder(host.outer, apply(host.normalizer.inverse(), far))


def concentric_adjust(first: RoundCylinder, second: RoundCylinder, width: Optional[float] = None) -> ConcentricAdjustment:
    """γ moves `second` to be concentric with `first`; η∘γ fixes the shared circle."""
    side1, side2 = first.shared_circle(second)
    shared = first.outer if side1 == 1 else first.inner
    w = second.core_length if width is None else float(width)
    if w <= get_tolerances().geometric:
        raise DegenerateCoreError(f"core width {w} is too small for a concentric correction")
    p1, p2 = first.core_endpoints[side1], second.core_endpoints[side2]
    offset = dist_h3(p1, p2)
    if offset <= get_tolerances().geometric:
        shared_s = 0.0 if side2 == 0 else second.core_length
        eta = EtaMap(second.chart, shared_s, w, 0.0)
        return ConcentricAdjustment(MoebiusMap.identity(), eta, second, 0.0, shared)
    gamma = translation_along(geodesic_through(p2, p1), offset)
    adjusted = second.moved_by(gamma)
    shared_s = 0.0 if side2 == 0 else adjusted.core_length
    moved_p2 = apply(adjusted.normalizer, p2)
    direction = moved_p2.base / abs(moved_p2.base)
    eta = EtaMap(adjusted.chart, shared_s, w, offset, direction)
    LOGGER.debug("Concentric adjustment by %.6g", offset)
    return ConcentricAdjustment(gamma, eta, adjusted, offset, shared)


def seam_residual(adjustment: ConcentricAdjustment, samples: int = 64) -> float:
    """Largest chordal distance |η(γ(x)) − x| over points x of the shared circle."""
    points = adjustment.shared.sample(samples)
    moved = adjustment.eta.on_sphere(adjustment.gamma.act(points))
    return max(
        chordal_distance(SpherePoint.finite(x), SpherePoint.finite(y)) for x, y in zip(points, moved)
    )


def chart_transfer(source: LogChart, g: MoebiusMap, target: LogChart) -> "ChartTransfer":
    return ChartTransfer(target.normalizer.compose(g).compose(source.normalizer.inverse()))


@dataclass(frozen=True)
class ChartTransfer:
    """Log-chart expression of a Möbius map T between normalized annuli."""

    mobius: MoebiusMap

    def __call__(self, points: np.ndarray) -> np.ndarray:
        z = np.exp(points[:, 0] + 1j * points[:, 1])
        image = self.mobius.act(z)
        return np.column_stack([np.log(np.abs(image)), points[:, 1] + np.angle(image / z)])

    def log_derivative(self, points: np.ndarray) -> np.ndarray:
        z = np.exp(points[:, 0] + 1j * points[:, 1])
        return z * self.mobius.derivative(z) / self.mobius.act(z)


@dataclass(frozen=True)
class ModifiedMetric:
    """Pull-back to one rectangle of the common flat metric after the chain is made concentric."""

    rectangle: SupportedRectangle
    transfer: ChartTransfer
    adjusted: RoundCylinder
    eta: Optional[EtaMap] = None

    def chart_map(self, points: np.ndarray) -> np.ndarray:
        moved = self.transfer(points)
        return moved if self.eta is None else self.eta(moved)

    def tensor(self, points: np.ndarray) -> np.ndarray:
        jac = _log_derivative_matrix(self.transfer.log_derivative(points))
        if self.eta is not None:
            moved = self.transfer(points)
            steps = np.full(len(points), get_tolerances().fd_step)
            jac = jacobians(self.eta, moved, steps) @ jac
        return np.swapaxes(jac, 1, 2) @ jac

    def develop(self, points: np.ndarray, reference: LogChart) -> np.ndarray:
        """Images in the reference chart (v reduced to (−π, π])."""
        sphere = self.adjusted.chart.from_chart(self.chart_map(points))
        return reference.to_chart(sphere)

    def distortion(self, config: Optional[SamplerConfig] = None) -> DistortionEstimate:
        return estimate_distortion(
            lambda p: p,
            RectangleDomain(self.rectangle),
            None,
            self.tensor,
            config,
            label="modified metric",
        )


def modified_metric(chain: Sequence[SupportedRectangle]) -> List[ModifiedMetric]:
    """Adjust hosts left to right until all are concentric with the first."""
    if not chain:
        return []
    first = chain[0]
    metrics = [ModifiedMetric(first, ChartTransfer(MoebiusMap.identity()), first.host)]
    total = MoebiusMap.identity()
    previous = first.host
    shifted = False
    for rectangle in chain[1:]:
        host = rectangle.host
        moved = host.moved_by(total) if shifted else host
        adjustment = concentric_adjust(previous, moved)
        if adjustment.offset == 0.0 and not shifted:
            metrics.append(ModifiedMetric(rectangle, ChartTransfer(MoebiusMap.identity()), host))
            previous = host
            continue
        shifted = True
        total = adjustment.gamma.compose(total)
        transfer = chart_transfer(host.chart, total, adjustment.adjusted.chart)
        eta = None if adjustment.eta.is_identity else adjustment.eta
        metrics.append(ModifiedMetric(rectangle, transfer, adjustment.adjusted, eta))
        previous = adjustment.adjusted
    return metrics


@dataclass
class SeamReport:
    position: float
    metric: float


def seam_mismatch(metrics: Sequence[ModifiedMetric], index: int, samples: int = 64) -> SeamReport:
    """Two-sided comparison on the circle shared by rectangles index−1 and index."""
    left, right = metrics[index - 1], metrics[index]
    reference = metrics[0].adjusted.chart
    theta = TWO_PI * (np.arange(samples) + 0.5) / samples
    left_points = np.column_stack([np.full(samples, left.rectangle.width), theta])
    sphere = left.rectangle.chart.from_chart(left_points)
    right_points = right.rectangle.chart.to_chart(sphere)
    a, b = left.develop(left_points, reference), right.develop(right_points, reference)
    position = float(np.max(np.hypot(a[:, 0] - b[:, 0], _wrap(a[:, 1] - b[:, 1]))))
    tangent_left = np.tile([0.0, 1.0], (samples, 1))
    step = ChartTransfer(right.rectangle.chart.normalizer.compose(left.rectangle.chart.normalizer.inverse()))
    d = step.log_derivative(left_points)
    tangent_right = np.column_stack([-d.imag, d.real])
    g_left = np.einsum("ni,nij,nj->n", tangent_left, left.tensor(left_points), tangent_left)
    g_right = np.einsum("ni,nij,nj->n", tangent_right, right.tensor(right_points), tangent_right)
    return SeamReport(position, float(np.max(np.abs(g_left - g_right))))


def is_structurally_admissible(chain: Sequence[SupportedRectangle]) -> bool:
    """A loop carried through rectangles on cylinders with positive cores counts as admissible."""
    return bool(chain) and all(r.host.core_length > get_tolerances().geometric for r in chain)


def xi_bench(
    deltas: Sequence[float],
    K: float = TWO_PI,
    seed: int = 42,
    config: Optional[SamplerConfig] = None,
) -> List[Dict[str, float]]:
    """ξ between independently drawn nearly circular rectangles with leaf lengths 1/δ."""
    config = config or SamplerConfig(seed=seed)
    rows = []
    for delta in deltas:
        if not delta > 0:
            raise DegenerateError("xi-bench needs positive deltas")
        leaf = 1.0 / delta
        rectangles = []
        for side in (0, 1):
            rng = np.random.default_rng(np.random.SeedSequence([seed, XI_STREAM, side]))
            core = K + delta * float(rng.uniform(0.0, 1.0))
            profile = EdgeProfile.draw(rng)
            rectangles.append(perturbed_rectangle(concentric_cylinder(1.0, math.exp(core)), leaf, delta, profile))
        estimate = estimate_distortion(xi_map(*rectangles), RectangleDomain(rectangles[0]), config=config, label=f"xi delta={delta:g}")
        rows.append({"delta": delta, "V": leaf, "A_est": estimate.A_est, "B_est": estimate.B_est, "K_qc_est": estimate.K_qc_est})
        LOGGER.info("xi-bench delta=%g A_est=%.9g", delta, estimate.A_est)
    return rows


def eta_bench(
    deltas: Sequence[float],
    width: float = TWO_PI,
    seed: int = 42,
    config: Optional[SamplerConfig] = None,
) -> List[Dict[str, float]]:
    """η for a cylinder glued to {e^−w ≤ |z| ≤ 1} with its core endpoint moved by δ."""
    config = config or SamplerConfig(seed=seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, ETA_STREAM]))
    direction = float(rng.uniform(0.0, TWO_PI))
    first = concentric_cylinder(math.exp(-width), 1.0)
    rows = []
    for delta in deltas:
        second = adjacent_offset_cylinder(first, width, delta, direction)
        adjustment = concentric_adjust(first, second)
        domain = ChartDomain((0.0, width), avoid=(width / 2.0,))
        estimate = estimate_distortion(adjustment.eta, domain, config=config, label=f"eta delta={delta:g}")
        rows.append(
            {
                "delta": delta,
                "w": width,
                "displacement": sup_displacement(adjustment.eta, domain, config),
                "A_est": estimate.A_est,
                "B_est": estimate.B_est,
                "K_qc_est": estimate.K_qc_est,
                "seam_residual": seam_residual(adjustment),
            }
        )
        LOGGER.info("eta-bench delta=%g A_est=%.9g", delta, estimate.A_est)
    return rows
