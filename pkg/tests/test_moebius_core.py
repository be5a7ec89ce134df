import cmath
import math

import numpy as np
import pytest

from graftlab import settings
from graftlab.errors import (
    CirclesIntersectError,
    DegenerateError,
    DisjointError,
    IdentityMapError,
    NotLoxodromicError,
)
from graftlab.moebius_core import (
    CircleOnSphere,
    GeodesicH2,
    GeodesicH3,
    H2Point,
    H3Point,
    HyperbolicPlaneH3,
    MapType,
    MoebiusMap,
    SpherePoint,
    angle_between_geodesics,
    apply,
    axis,
    classify,
    dist_h2,
    dist_h3,
    fixed_points,
    geodesic_through,
    h2_geodesic_point,
    inversive_product,
    limit_points,
    normalizing_map,
    plane_distance,
    translation_along,
    translation_length,
)


def random_map(rng):
    entries = rng.normal(size=4) + 1j * rng.normal(size=4)
    return MoebiusMap.from_entries(*entries)


def random_h3(rng):
    x, y = rng.normal(size=2)
    return H3Point(float(x), float(y), float(math.exp(rng.normal())))


def test_normalization_gives_unit_determinant(rng):
    for _ in range(50):
        g = random_map(rng)
        assert abs(g.determinant - 1) <= 1e-12


def test_singular_matrix_is_rejected():
    with pytest.raises(DegenerateError):
        MoebiusMap.from_entries(1, 2, 2, 4)


def test_large_but_regular_matrix_is_accepted():
    g = MoebiusMap.from_entries(1, 0, 1, -1e14)
    assert abs(g.determinant - 1) <= 1e-12


def test_small_circles_are_not_degenerate():
    tiny = CircleOnSphere.from_center_radius(0, 1e-7)
    centre, radius = tiny.center_radius()
    assert abs(centre) == 0
    assert radius == pytest.approx(1e-7, rel=1e-9)
    off_centre = CircleOnSphere.from_center_radius(0.5, 1e-5)
    assert off_centre.center_radius()[1] == pytest.approx(1e-5, rel=1e-4)


def test_point_circle_is_degenerate():
    c = 0.3 + 0.4j
    with pytest.raises(DegenerateError):
        CircleOnSphere(1.0, -c, abs(c) ** 2)


def test_composition_is_associative(rng):
    f, g, h = random_map(rng), random_map(rng), random_map(rng)
    assert ((f @ g) @ h).isclose(f @ (g @ h), 1e-12)


def test_negated_map_acts_identically(rng):
    g = random_map(rng)
    negated = MoebiusMap(-g.a, -g.b, -g.c, -g.d)
    z = rng.normal(size=8) + 1j * rng.normal(size=8)
    np.testing.assert_allclose(g.act(z), negated.act(z), rtol=1e-14)
    assert g.isclose(negated)


def test_classify_examples():
    assert classify(MoebiusMap.identity()) is MapType.IDENTITY
    assert classify(MoebiusMap.diagonal(2.0)) is MapType.LOXODROMIC
    assert classify(MoebiusMap.from_entries(1, 1, 0, 1)) is MapType.PARABOLIC
    rotation = MoebiusMap.from_entries(math.cos(0.3), -math.sin(0.3), math.sin(0.3), math.cos(0.3))
    assert classify(rotation) is MapType.ELLIPTIC


def test_classify_is_conjugation_invariant(rng):
    for _ in range(200):
        g, h = random_map(rng), random_map(rng)
        assert classify(g) is classify(g.conjugate_by(h))


def test_translation_length_closed_forms():
    root2 = math.sqrt(2.0)
    assert translation_length(MoebiusMap.from_entries(root2, 0, 0, 1 / root2)) == pytest.approx(math.log(2.0), abs=1e-12)
    assert translation_length(MoebiusMap.from_entries(math.e, 0, 0, 1 / math.e)) == pytest.approx(2.0, abs=1e-12)


def test_translation_length_rejects_parabolic():
    with pytest.raises(NotLoxodromicError):
        translation_length(MoebiusMap.from_entries(1, 1, 0, 1))


def test_translation_length_is_conjugation_invariant(rng):
    g = MoebiusMap.from_entries(math.sqrt(2.0), 0, 0, 1 / math.sqrt(2.0))
    for _ in range(200):
        h = random_map(rng)
        assert translation_length(g.conjugate_by(h)) == pytest.approx(math.log(2.0), abs=1e-10)


def test_translation_length_matches_displacement_on_axis(rng):
    g = random_map(rng)
    geodesic = axis(g)
    w = normalizing_map(geodesic.start, geodesic.end)
    point = apply(w.inverse(), H3Point(0.0, 0.0, 1.0))
    assert dist_h3(point, apply(g, point)) == pytest.approx(translation_length(g), abs=1e-6)


def test_fixed_points_of_dilation():
    repelling, attracting = fixed_points(MoebiusMap.diagonal(2.0))
    assert repelling == SpherePoint.finite(0)
    assert attracting == SpherePoint.infinity()
    geodesic = axis(MoebiusMap.diagonal(2.0))
    assert geodesic.start == SpherePoint.finite(0)


def test_parabolic_has_double_fixed_point_and_no_axis():
    g = MoebiusMap.translation(1.0)
    first, second = fixed_points(g)
    assert first.infinite and second.infinite
    with pytest.raises(NotLoxodromicError):
        axis(g)


def test_identity_has_no_fixed_points():
    with pytest.raises(IdentityMapError):
        fixed_points(MoebiusMap.identity())


def test_fixed_points_satisfy_equation():
    g = MoebiusMap.from_entries(2, 1, 1, 1)
    repelling, attracting = fixed_points(g)
    for p in (repelling, attracting):
        assert abs(g.act(p.value) - p.value) < 1e-10
    assert abs(g.derivative(repelling.value)) > 1 > abs(g.derivative(attracting.value))
    assert repelling.value.real == pytest.approx((1 - math.sqrt(5)) / 2, abs=1e-12)
    assert attracting.value.real == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)


def test_dist_h3_examples():
    assert dist_h3(H3Point(0, 0, 1), H3Point(0, 0, math.e)) == pytest.approx(1.0, abs=1e-12)
    p = H3Point(0.3, -0.2, 0.7)
    assert dist_h3(p, p) == 0.0


def test_dist_h2_matches_cosh_formula():
    p, q = H2Point(0.2, 0.5), H2Point(-1.0, 2.0)
    expected = math.acosh(1 + ((p.x - q.x) ** 2 + (p.h - q.h) ** 2) / (2 * p.h * q.h))
    assert dist_h2(p, q) == pytest.approx(expected, rel=1e-12)


def test_distance_is_moebius_invariant(rng):
    for _ in range(200):
        g = random_map(rng)
        p, q = random_h3(rng), random_h3(rng)
        assert abs(dist_h3(p, q) - dist_h3(apply(g, p), apply(g, q))) < 1e-9


def test_apply_then_inverse_returns_point(rng):
    for _ in range(100):
        g = random_map(rng)
        p = random_h3(rng)
        back = apply(g.inverse(), apply(g, p))
        assert math.dist((back.x, back.y, back.h), (p.x, p.y, p.h)) < 1e-10
        z = SpherePoint.finite(complex(*rng.normal(size=2)))
        assert apply(g.inverse(), apply(g, z)).chordal_distance(z) < 1e-10


def test_apply_identity_and_similarity_on_circles():
    unit = CircleOnSphere.from_center_radius(0, 1)
    same = apply(MoebiusMap.identity(), unit)
    assert same.coefficient_distance(unit) < 1e-15
    doubled = apply(MoebiusMap.diagonal(2.0), unit)
    centre, radius = doubled.center_radius()
    assert abs(centre) < 1e-12
    assert radius == pytest.approx(2.0, abs=1e-12)


def test_circle_images_stay_concyclic(rng):
    circle = CircleOnSphere.from_center_radius(0.4 - 0.1j, 1.3)
    for _ in range(50):
        g = random_map(rng)
        z = g.act(circle.sample(4))
        cross = (z[0] - z[2]) * (z[1] - z[3]) / ((z[0] - z[3]) * (z[1] - z[2]))
        assert abs(cross.imag) <= 1e-9 * max(1.0, abs(cross))
        image = apply(g, circle)
        scale = math.sqrt(image.discriminant)
        assert np.max(np.abs(image.evaluate(z))) / scale < 1e-7 * max(1.0, float(np.max(np.abs(z))) ** 2)


def test_line_samples_lie_on_the_line():
    line = CircleOnSphere.line(1j, 1.0)
    assert line.is_line()
    assert np.max(np.abs(line.evaluate(line.sample(16)))) < 1e-9


def test_plane_distance_examples():
    unit = HyperbolicPlaneH3(CircleOnSphere.from_center_radius(0, 1))
    assert plane_distance(unit, HyperbolicPlaneH3(CircleOnSphere.from_center_radius(0, math.e))) == pytest.approx(1.0, abs=1e-12)
    far = HyperbolicPlaneH3(CircleOnSphere.from_center_radius(0, math.exp(2 * math.pi)))
    assert plane_distance(unit, far) == pytest.approx(2 * math.pi, abs=1e-9)


def test_plane_distance_rejects_meeting_circles():
    first = HyperbolicPlaneH3(CircleOnSphere.from_center_radius(0, 1))
    second = HyperbolicPlaneH3(CircleOnSphere.from_center_radius(1, 1))
    with pytest.raises(CirclesIntersectError):
        plane_distance(first, second)


def test_plane_distance_is_invariant_and_matches_core_points(rng):
    c1 = CircleOnSphere.from_center_radius(0.2, 0.5)
    c2 = CircleOnSphere.from_center_radius(3.0 + 1j, 0.8)
    distance = plane_distance(HyperbolicPlaneH3(c1), HyperbolicPlaneH3(c2))
    g = random_map(rng)
    moved = plane_distance(HyperbolicPlaneH3(apply(g, c1)), HyperbolicPlaneH3(apply(g, c2)))
    assert moved == pytest.approx(distance, abs=1e-9)
    p, q = limit_points(c1, c2)
    w = normalizing_map(p, q)
    _, r1 = apply(w, c1).center_radius()
    _, r2 = apply(w, c2).center_radius()
    assert math.log(r2 / r1) == pytest.approx(distance, abs=1e-9)


def test_limit_points_are_ordered_by_side():
    inner = CircleOnSphere.from_center_radius(0, 1)
    outer = CircleOnSphere.from_center_radius(0, math.e)
    p, q = limit_points(inner, outer)
    assert p == SpherePoint.finite(0)
    assert q.infinite
    p, q = limit_points(outer, inner)
    assert p.infinite


def test_inversive_product_of_concentric_circles():
    assert abs(inversive_product(CircleOnSphere.from_center_radius(0, 1), CircleOnSphere.from_center_radius(0, math.e))) == pytest.approx(math.cosh(1.0), rel=1e-12)


def test_translation_along_moves_by_distance():
    geodesic = GeodesicH3(SpherePoint.finite(-1), SpherePoint.finite(1))
    g = translation_along(geodesic, 0.7)
    start = H3Point(0.0, 0.0, 1.0)
    end = apply(g, start)
    assert dist_h3(start, end) == pytest.approx(0.7, abs=1e-12)
    assert end.x > 0


def test_geodesic_through_contains_both_points():
    p, q = H3Point(0.1, 0.2, 0.5), H3Point(1.0, -0.4, 1.5)
    geodesic = geodesic_through(p, q)
    g = translation_along(geodesic, dist_h3(p, q))
    moved = apply(g, p)
    assert math.dist((moved.x, moved.y, moved.h), (q.x, q.y, q.h)) < 1e-9


def test_h2_geodesic_point_splits_distance():
    p, q = H2Point(-0.5, 0.3), H2Point(2.0, 1.7)
    mid = h2_geodesic_point(p, q, 0.25)
    total = dist_h2(p, q)
    assert dist_h2(p, mid) == pytest.approx(0.25 * total, abs=1e-10)
    assert dist_h2(mid, q) == pytest.approx(0.75 * total, abs=1e-10)


def test_angle_between_geodesics_examples():
    vertical = GeodesicH2.between(0.0, None)
    arc = GeodesicH2.between(-1.0, 1.0)
    assert angle_between_geodesics(vertical, arc) == pytest.approx(math.pi / 2, abs=1e-12)
    assert angle_between_geodesics(arc, arc) == 0.0
    with pytest.raises(DisjointError):
        angle_between_geodesics(GeodesicH3(SpherePoint.finite(0), SpherePoint.infinity()), GeodesicH3(SpherePoint.finite(0), SpherePoint.finite(1)))
    with pytest.raises(DisjointError):
        angle_between_geodesics(GeodesicH2.between(2.0, 3.0), arc)


def test_angle_of_tilted_arc():
    vertical = GeodesicH2.between(0.0, None)
    arc = GeodesicH2.between(-1.0, 3.0)
    # the arc has centre 1 and radius 2, meeting x = 0 at height √3
    assert angle_between_geodesics(vertical, arc) == pytest.approx(math.acos(0.5), abs=1e-12)


def test_json_round_trip_formats():
    g = MoebiusMap.from_entries(2, 1, 1, 1)
    assert MoebiusMap.from_json(g.to_json()).isclose(g)
    assert MoebiusMap.from_json([[2, 1], [1, 1]]).isclose(g)
    assert MoebiusMap.from_json({"a": 2, "b": 1, "c": 1, "d": 1}).isclose(g)
    circle = CircleOnSphere.from_json({"center": [1.0, 2.0], "radius": 0.5})
    assert CircleOnSphere.from_json(circle.to_json()).coefficient_distance(circle) < 1e-15


def test_tolerance_override_is_global():
    settings.configure(geometric=1e-3)
    assert SpherePoint.finite(0) == SpherePoint.finite(1e-4)
    settings.reset()
    assert SpherePoint.finite(0) != SpherePoint.finite(1e-4)


def test_complex_multiplier_translation_length():
    lam = 1.5 * cmath.exp(0.4j)
    g = MoebiusMap.from_entries(lam, 0, 0, 1 / lam)
    assert translation_length(g) == pytest.approx(2 * math.log(1.5), abs=1e-12)
