import math

import numpy as np
import pytest

from graftlab.cylinder_geometry import (
    EdgeProfile,
    EtaMap,
    GeodesicQuad,
    RectangleDomain,
    SupportedRectangle,
    adjacent_offset_cylinder,
    chart_transfer,
    concentric_adjust,
    concentric_cylinder,
    core_offset,
    eta_bench,
    is_nearly_circular,
    is_nearly_concentric,
    is_nearly_straight_branch,
    is_structurally_admissible,
    make_circular_rectangle,
    make_cylinder,
    modified_metric,
    perturbed_rectangle,
    seam_mismatch,
    seam_residual,
    xi_bench,
    xi_map,
)
from graftlab.distortion import SamplerConfig, estimate_distortion
from graftlab.errors import CirclesIntersectError, DegenerateError, NotAdjacentError
from graftlab.models import NearnessParams
from graftlab.moebius_core import (
    CircleOnSphere,
    H2Point,
    HyperbolicPlaneH3,
    MoebiusMap,
    plane_distance,
)

TWO_PI = 2.0 * math.pi
CONFIG = SamplerConfig(samples=1024, pairs=256, seed=3)


def wide_host():
    return concentric_cylinder(1.0, math.exp(TWO_PI))


def test_core_length_equals_plane_distance():
    pairs = [
        (CircleOnSphere.from_center_radius(0, 1), CircleOnSphere.from_center_radius(0, math.e)),
        (CircleOnSphere.from_center_radius(0.2, 0.5), CircleOnSphere.from_center_radius(3 + 1j, 0.8)),
        (CircleOnSphere.line(0, 1), CircleOnSphere.from_center_radius(2j, 1)),
    ]
    for c1, c2 in pairs:
        cylinder = make_cylinder(c1, c2)
        distance = plane_distance(HyperbolicPlaneH3(c1), HyperbolicPlaneH3(c2))
        assert cylinder.core_length == pytest.approx(distance, abs=1e-9)
        assert cylinder.modulus == pytest.approx(distance / TWO_PI, abs=1e-9)


def test_meeting_circles_do_not_bound_a_cylinder():
    with pytest.raises(CirclesIntersectError):
        make_cylinder(CircleOnSphere.from_center_radius(0, 1), CircleOnSphere.from_center_radius(0.5, 1))


def test_log_chart_of_concentric_cylinder():
    cylinder = concentric_cylinder(1.0, math.exp(2.0))
    chart = cylinder.chart
    points = chart.to_chart(np.array([1.0, math.exp(2.0) * 1j]))
    np.testing.assert_allclose(points, [[0.0, 0.0], [2.0, math.pi / 2]], atol=1e-12)
    np.testing.assert_allclose(chart.from_chart(points), [1.0, math.exp(2.0) * 1j], atol=1e-12)
    assert chart.flat_length(chart.vertical_circle(1.0)) == pytest.approx(TWO_PI, abs=1e-12)


def test_core_endpoints_and_sides():
    cylinder = concentric_cylinder(1.0, math.e)
    low, high = cylinder.core_endpoints
    assert (low.x, low.y, low.h) == pytest.approx((0.0, 0.0, 1.0), abs=1e-12)
    assert high.h == pytest.approx(math.e, abs=1e-12)
    assert cylinder.side_of(CircleOnSphere.from_center_radius(0, math.e)) == 1
    assert cylinder.side_of(CircleOnSphere.from_center_radius(0, 2.0)) is None
    with pytest.raises(NotAdjacentError):
        cylinder.core_endpoint_on(CircleOnSphere.from_center_radius(0, 2.0))


def test_adjacent_cylinders_and_chart_transition():
    first = concentric_cylinder(1.0, math.e)
    second = concentric_cylinder(math.e, math.exp(3.0))
    assert first.shared_circle(second) == (1, 0)
    assert core_offset(first, second) == pytest.approx(0.0, abs=1e-12)
    assert is_nearly_concentric(first, second, 1e-6)
    transition = first.chart.transition(second.chart)
    assert transition.sign == 1
    points = np.array([[0.5, 0.2], [1.0, -1.0]])
    np.testing.assert_allclose(transition(points), points - np.array([1.0, 0.0]), atol=1e-12)
    with pytest.raises(NotAdjacentError):
        first.shared_circle(concentric_cylinder(math.exp(2.0), math.exp(3.0)))


def test_transition_rejects_non_concentric_charts():
    first = concentric_cylinder(1.0, math.e)
    shifted = adjacent_offset_cylinder(first, 1.0, 0.1)
    with pytest.raises(NotAdjacentError):
        first.chart.transition(shifted.chart)


def test_circular_and_perturbed_rectangles():
    host = wide_host()
    rectangle = make_circular_rectangle(host, 100.0)
    assert rectangle.width == pytest.approx(TWO_PI)
    assert float(rectangle.leaf_length(1.0)) == pytest.approx(100.0)
    params = NearnessParams(eps=0.02, K=1.0)
    assert is_nearly_circular(rectangle, params)
    profile = EdgeProfile.draw(np.random.default_rng(5))
    wobbly = perturbed_rectangle(host, 100.0, 0.01, profile)
    report = is_nearly_circular(wobbly, params)
    assert report.ok
    assert report.oscillation <= 0.005 + 1e-12
    assert wobbly.min_leaf_length() >= 100.0 - 0.005


def test_rough_edges_fail_the_circularity_check():
    host = wide_host()
    profile = EdgeProfile(bottom_amp=1.0, bottom_freq=2)
    rough = perturbed_rectangle(host, 10.0, 1.0, profile)
    report = is_nearly_circular(rough, NearnessParams(eps=0.01, K=10.0))
    assert not report.ok
    assert len(report.reasons) == 3


def test_rectangle_validation():
    host = wide_host()
    nodes = np.linspace(0.0, host.core_length, 8)
    with pytest.raises(DegenerateError):
        SupportedRectangle(host, nodes, np.zeros(8), np.ones(8))
    nodes = np.linspace(0.0, host.core_length, 16)
    with pytest.raises(DegenerateError):
        SupportedRectangle(host, nodes, np.ones(16), np.zeros(16))
    with pytest.raises(DegenerateError):
        SupportedRectangle(host, nodes * 0.5, np.zeros(16), np.ones(16))


def test_rectangle_domain_stays_inside(rng):
    profile = EdgeProfile.draw(rng)
    rectangle = perturbed_rectangle(wide_host(), 5.0, 0.1, profile)
    points = RectangleDomain(rectangle).sample(rng, 2000)
    u, v = points[:, 0], points[:, 1]
    assert np.all((u > 0) & (u < rectangle.width))
    assert np.all(v >= rectangle.bottom(u) - 1e-12)
    assert np.all(v <= rectangle.top(u) + 1e-12)


def test_xi_of_a_rectangle_with_itself_is_the_identity(rng):
    rectangle = perturbed_rectangle(wide_host(), 50.0, 0.05, EdgeProfile.draw(rng))
    xi = xi_map(rectangle, rectangle)
    assert xi.ratio == 1.0
    points = RectangleDomain(rectangle).sample(rng, 500)
    np.testing.assert_array_equal(xi(points), points)
    estimate = estimate_distortion(xi, RectangleDomain(rectangle), config=CONFIG)
    assert estimate.A_est == pytest.approx(1.0, abs=1e-9)
    assert estimate.K_qc_est == pytest.approx(1.0, abs=1e-9)
    assert estimate.B_est == pytest.approx(0.0, abs=1e-9)


def test_xi_vertical_stretch():
    host = wide_host()
    short, tall = make_circular_rectangle(host, 100.0), make_circular_rectangle(host, 100.5)
    estimate = estimate_distortion(xi_map(short, tall), RectangleDomain(short), config=CONFIG)
    assert estimate.A_est <= 1.005 + 1e-6
    assert estimate.A_est == pytest.approx(1.005, abs=1e-6)


def test_xi_inverse_undoes_the_map(rng):
    first = perturbed_rectangle(wide_host(), 20.0, 0.1, EdgeProfile.draw(rng))
    second = perturbed_rectangle(concentric_cylinder(1.0, math.exp(TWO_PI + 0.05)), 20.5, 0.1, EdgeProfile.draw(rng))
    xi = xi_map(first, second)
    points = RectangleDomain(first).sample(rng, 500)
    np.testing.assert_allclose(xi.inverse()(xi(points)), points, atol=1e-9)


def test_small_quad_is_nearly_straight():
    quad = GeodesicQuad(H2Point(0.0, 1.0), H2Point(0.01, 1.0), H2Point(0.01, 1.01), H2Point(0.0, 1.01))
    report = is_nearly_straight_branch(quad, eps=0.1, w=0.005)
    assert report.ok
    assert report.width == pytest.approx(0.01, rel=0.02)
    assert report.defect < 0.01
    assert not is_nearly_straight_branch(quad, eps=0.1, w=1.0).ok


def test_quad_with_coincident_vertices_is_degenerate():
    p = H2Point(0.0, 1.0)
    with pytest.raises(DegenerateError):
        is_nearly_straight_branch(GeodesicQuad(p, p, H2Point(0.0, 2.0), H2Point(1.0, 2.0)), eps=0.1, w=0.1)


def test_eta_map_moves_only_along_circles(rng):
    chart = concentric_cylinder(1.0, math.exp(2.0)).chart
    eta = EtaMap(chart, 0.0, 2.0, 0.05, complex(math.cos(0.4), math.sin(0.4)))
    points = np.column_stack([rng.uniform(0.0, 2.0, 300), rng.uniform(-math.pi, math.pi, 300)])
    moved = eta(points)
    np.testing.assert_array_equal(moved[:, 0], points[:, 0])
    far = points[:, 0] >= 1.0
    np.testing.assert_array_equal(moved[far], points[far])
    np.testing.assert_allclose(eta.inverse(moved), points, atol=1e-12)
    assert EtaMap(chart, 0.0, 2.0, 0.0).is_identity


def test_concentric_adjust_of_concentric_pair_is_trivial():
    first = concentric_cylinder(1.0, math.e)
    second = concentric_cylinder(math.e, math.exp(3.0))
    adjustment = concentric_adjust(first, second)
    assert adjustment.offset == 0.0
    assert adjustment.gamma.isclose(MoebiusMap.identity())
    assert adjustment.eta.is_identity
    assert adjustment.adjusted is second


def test_concentric_adjust_removes_the_offset():
    first = concentric_cylinder(1.0, math.exp(2.0))
    second = adjacent_offset_cylinder(first, 2.0, 0.05, 0.3)
    adjustment = concentric_adjust(first, second)
    assert adjustment.offset == pytest.approx(0.05, abs=1e-8)
    gamma, eta, adjusted = adjustment
    assert core_offset(first, adjusted) < 1e-8
    assert seam_residual(adjustment) < 1e-8
    assert not eta.is_identity


def test_chart_transfer_of_identity():
    chart = concentric_cylinder(1.0, math.e).chart
    transfer = chart_transfer(chart, MoebiusMap.identity(), chart)
    points = np.array([[0.1, 0.2], [0.9, -3.0]])
    np.testing.assert_allclose(transfer(points), points, atol=1e-12)
    np.testing.assert_allclose(transfer.log_derivative(points), [1.0, 1.0], atol=1e-12)


def test_modified_metric_of_concentric_chain_is_flat():
    host = wide_host()
    neighbour = concentric_cylinder(math.exp(TWO_PI), math.exp(2 * TWO_PI))
    chain = [make_circular_rectangle(host, 10.0), make_circular_rectangle(neighbour, 10.0)]
    metrics = modified_metric(chain)
    assert len(metrics) == 2
    assert metrics[1].eta is None
    assert seam_mismatch(metrics, 1).position < 1e-9
    points = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_allclose(metrics[0].tensor(points), np.broadcast_to(np.eye(2), (2, 2, 2)), atol=1e-12)
    estimate = metrics[0].distortion(CONFIG)
    assert estimate.A_est == pytest.approx(1.0, abs=1e-9)
    assert modified_metric([]) == []


def test_modified_metric_across_an_offset_seam():
    first = concentric_cylinder(1.0, math.exp(2.0))
    second = adjacent_offset_cylinder(first, 2.0, 0.02, 1.1)
    chain = [make_circular_rectangle(first, 5.0), make_circular_rectangle(second, 5.0)]
    metrics = modified_metric(chain)
    assert metrics[1].eta is not None
    seam = seam_mismatch(metrics, 1)
    assert seam.position < 1e-8
    assert seam.metric < 1e-6
    assert is_structurally_admissible(chain)
    assert not is_structurally_admissible([])


def test_xi_bench_rows():
    rows = xi_bench([0.1, 0.01], seed=11, config=CONFIG)
    assert [row["V"] for row in rows] == pytest.approx([10.0, 100.0])
    for row in rows:
        assert 1.0 <= row["A_est"] <= 1.0 + 2.0 * row["delta"]
        assert row["K_qc_est"] <= row["A_est"] ** 2 + 1e-12
    assert rows == xi_bench([0.1, 0.01], seed=11, config=CONFIG)
    with pytest.raises(DegenerateError):
        xi_bench([0.0])


def test_eta_bench_rows():
    rows = eta_bench([0.1, 0.03, 0.01], seed=5, config=CONFIG)
    for row in rows:
        delta = row["delta"]
        assert row["w"] == pytest.approx(TWO_PI)
        assert row["displacement"] <= 2.0 * delta
        assert row["A_est"] - 1.0 <= 10.0 * delta
        assert row["seam_residual"] < 1e-8


def random_disjoint_pair(rng):
    centre = complex(*rng.uniform(-5.0, 5.0, 2))
    radius = float(rng.uniform(0.5, 3.0))
    angle = float(rng.uniform(0.0, TWO_PI))
    outer = CircleOnSphere.from_center_radius(centre, radius)
    if rng.uniform() < 0.5:
        inner_radius = radius * float(rng.uniform(0.1, 0.7))
        shift = float(rng.uniform(0.0, 1.0)) * (radius - inner_radius - 0.05)
        inner_centre = centre + shift * complex(math.cos(angle), math.sin(angle))
        return outer, CircleOnSphere.from_center_radius(inner_centre, inner_radius)
    gap = float(rng.uniform(0.05, 1.0))
    other_radius = float(rng.uniform(0.1, 3.0))
    other_centre = centre + (radius + other_radius + gap) * complex(math.cos(angle), math.sin(angle))
    return outer, CircleOnSphere.from_center_radius(other_centre, other_radius)


def test_core_length_matches_plane_distance_on_random_pairs():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        c1, c2 = random_disjoint_pair(rng)
        cylinder = make_cylinder(c1, c2)
        distance = plane_distance(HyperbolicPlaneH3(c1), HyperbolicPlaneH3(c2))
        assert cylinder.core_length == pytest.approx(distance, abs=1e-9)


@pytest.mark.parametrize("offset", [1e-6, 0.0077])
def test_offset_neighbour_of_a_wide_host(offset):
    host = wide_host()
    second = adjacent_offset_cylinder(host, TWO_PI, offset, 2.3)
    assert second.core_length == pytest.approx(TWO_PI, abs=1e-9)
    adjustment = concentric_adjust(host, second)
    assert adjustment.offset == pytest.approx(offset, rel=1e-4)
    assert core_offset(host, adjustment.adjusted) < 1e-8
    chain = [make_circular_rectangle(host, 10.0), make_circular_rectangle(second, 10.0)]
    seam = seam_mismatch(modified_metric(chain), 1)
    assert seam.position < 1e-8
    assert seam.metric < 1e-6


def test_xi_bench_improves_as_delta_shrinks():
    rows = xi_bench([0.1, 0.03, 0.01, 0.003])
    areas = [row["A_est"] for row in rows]
    for larger, smaller in zip(areas, areas[1:]):
        assert smaller <= larger + 1e-9
    assert areas[-1] <= 1.02


def test_eta_bench_improves_as_delta_shrinks():
    rows = eta_bench([0.1, 0.03, 0.01, 0.003], seed=5, config=CONFIG)
    for larger, smaller in zip(rows, rows[1:]):
        assert smaller["displacement"] <= larger["displacement"] + 1e-12
        assert smaller["A_est"] - 1.0 <= larger["A_est"] - 1.0 + 1e-9
