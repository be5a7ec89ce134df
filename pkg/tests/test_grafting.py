import math

import numpy as np
import pytest

from graftlab.errors import (
    GraftlabValidationError,
    InvalidWeightsError,
    NonPositiveError,
    NotLoxodromicError,
    UnknownLoopError,
)
from graftlab.grafting import (
    HyperbolicSurface,
    LengthTable,
    WeightedLoop,
    commutator_relation,
    crescent_quotient_modulus,
    geodesic_length,
    graft,
    invert_word,
    relation_residual,
    systole_constant,
    thurston_metric_summary,
    two_pi_graft,
    word_holonomy,
)
from graftlab.moebius_core import MoebiusMap
from graftlab.presets import single_loop_track, theta_track
from graftlab.traintrack import IntegerWeights, WeightVector


def one_loop_setup(weight=3.0, length=2.0):
    surface = HyperbolicSurface(2, LengthTable({"g": length}))
    track = single_loop_track()
    lamination = WeightVector.from_mapping(track, {"b": weight})
    return graft(surface, track, lamination, [WeightedLoop("g", weight, ("b",))])


def theta_setup():
    surface = HyperbolicSurface(2, LengthTable({"x": 1.5, "y": 2.5}))
    track = theta_track()
    lamination = WeightVector.from_mapping(track, {"b1": 1.0, "b2": 1.0, "b3": 2.0})
    loops = [WeightedLoop("x", 1.0, ("b1", "b3")), WeightedLoop("y", 1.0, ("b2", "b3"))]
    return graft(surface, track, lamination, loops)


def test_word_helpers():
    assert commutator_relation(["a", "b", "c", "d"]) == "abABcdCD"
    assert invert_word("aBc") == "CbA"


def test_bolza_surface_is_consistent(bolza):
    data = bolza.holonomy
    assert relation_residual(data) < 1e-8
    assert bolza.hyperbolic_area == pytest.approx(4 * math.pi)
    expected = 2.0 * math.acosh(1.0 + math.sqrt(2.0))
    for name in "abcd":
        assert geodesic_length(bolza, name) == pytest.approx(expected, abs=1e-9)
    assert systole_constant(bolza) == pytest.approx(expected / 3.0, abs=1e-9)


def test_word_holonomy_inverse_letters(bolza):
    product = word_holonomy(bolza, "aA")
    assert product.isclose(MoebiusMap.identity(), 1e-9)
    with pytest.raises(NotLoxodromicError):
        geodesic_length(bolza, "aA")
    with pytest.raises(UnknownLoopError):
        word_holonomy(bolza, "z")


def test_surface_round_trips_through_dict(bolza):
    again = HyperbolicSurface.from_dict(bolza.to_dict())
    assert relation_residual(again.holonomy) < 1e-8
    table = HyperbolicSurface.from_dict({"genus": 3, "lengths": {"g": 1.0}})
    assert table.hyperbolic_area == pytest.approx(8 * math.pi)


def test_surface_validation():
    with pytest.raises(GraftlabValidationError):
        HyperbolicSurface(1, LengthTable({"g": 1.0}))
    with pytest.raises(NonPositiveError):
        LengthTable({"g": 0.0})
    with pytest.raises(GraftlabValidationError):
        HyperbolicSurface.from_dict({"genus": 2, "fuchsian": {"generators": [[[2, 0], [0, 0], [0, 0], [0.5, 0]]]}})


def test_thurston_area_of_single_cylinder():
    summary = thurston_metric_summary(one_loop_setup())
    assert summary.total_area == pytest.approx(4 * math.pi + 6.0, abs=1e-12)
    (cylinder,) = summary.cylinders
    assert cylinder.modulus == pytest.approx(1.5)
    assert summary.summary_lines()[-1].startswith("Total area")


def test_two_pi_graft_preserves_holonomy_and_grows_area():
    coords = one_loop_setup()
    N = IntegerWeights.from_mapping(coords.track, {"b": 1})
    grafted = two_pi_graft(coords, N)
    assert grafted.surface is coords.surface
    assert grafted.metadata["holonomy_preserved"] is True
    assert grafted.metadata["grafting_weights"] == {"b": 1}
    assert grafted.lamination["b"] == pytest.approx(3.0 + 2 * math.pi)
    summary = thurston_metric_summary(grafted)
    assert summary.total_area == pytest.approx(4 * math.pi + 2.0 * (3.0 + 2 * math.pi), abs=1e-12)
    twice = two_pi_graft(grafted, N)
    assert twice.metadata["grafting_weights"] == {"b": 2}


def test_two_pi_graft_redistributes_over_loops():
    coords = theta_setup()
    N = IntegerWeights.from_mapping(coords.track, {"b1": 1, "b2": 0, "b3": 1})
    grafted = two_pi_graft(coords, N)
    weights = {loop.label: loop.weight for loop in grafted.realization}
    assert weights["x"] == pytest.approx(1.0 + 2 * math.pi)
    assert weights["y"] == pytest.approx(1.0)
    np.testing.assert_allclose(grafted.lamination.values, [1 + 2 * math.pi, 1.0, 2 + 2 * math.pi])


def test_two_pi_graft_splits_over_parallel_copies_of_a_loop():
    surface = HyperbolicSurface(2, LengthTable({"g": 2.0, "h": 2.0}))
    track = single_loop_track()
    lamination = WeightVector.from_mapping(track, {"b": 3.0})
    coords = graft(surface, track, lamination, [WeightedLoop("g", 1.5, ("b",)), WeightedLoop("h", 1.5, ("b",))])
    grafted = two_pi_graft(coords, IntegerWeights.from_mapping(track, {"b": 3}))
    weights = [loop.weight for loop in grafted.realization]
    assert weights == pytest.approx([1.5 + 3 * 2 * math.pi, 1.5])
    summary = thurston_metric_summary(grafted)
    assert summary.total_area == pytest.approx(4 * math.pi + 2.0 * (3.0 + 3 * 2 * math.pi), abs=1e-12)


def test_grafting_off_the_realized_loops_drops_the_realization(caplog):
    surface = HyperbolicSurface(2, LengthTable({"x": 1.5}))
    track = theta_track()
    lamination = WeightVector.from_mapping(track, {"b1": 1.0, "b2": 0.0, "b3": 1.0})
    coords = graft(surface, track, lamination, [WeightedLoop("x", 1.0, ("b1", "b3"))])
    with caplog.at_level("WARNING", logger="graftlab.grafting"):
        grafted = two_pi_graft(coords, IntegerWeights.from_mapping(track, {"b1": 0, "b2": 1, "b3": 1}))
    assert grafted.realization == ()
    assert "dropping the realization" in caplog.text


def test_unrealized_grafting_cannot_be_summarized():
    surface = HyperbolicSurface(2, LengthTable({"x": 1.0}))
    track = theta_track()
    coords = graft(surface, track, WeightVector.zeros(track))
    assert thurston_metric_summary(coords).cylinders == []
    grafted = two_pi_graft(coords, IntegerWeights.from_mapping(track, {"b1": 1, "b2": 0, "b3": 1}))
    assert grafted.realization == ()
    with pytest.raises(UnknownLoopError):
        thurston_metric_summary(grafted)


def test_graft_rejects_inconsistent_inputs():
    surface = HyperbolicSurface(2, LengthTable({"g": 2.0}))
    track = single_loop_track()
    lamination = WeightVector.from_mapping(track, {"b": 3.0})
    with pytest.raises(InvalidWeightsError):
        graft(surface, track, lamination, [WeightedLoop("g", 2.0, ("b",))])
    with pytest.raises(UnknownLoopError):
        graft(surface, track, lamination, [WeightedLoop("h", 3.0, ("b",))])
    coords = graft(surface, track, lamination)
    with pytest.raises(InvalidWeightsError):
        two_pi_graft(
            theta_setup(), IntegerWeights.from_mapping(theta_track(), {"b1": 1, "b2": 1, "b3": 1})
        )
    assert coords.realization == ()


def test_crescent_quotient_modulus():
    assert crescent_quotient_modulus(math.pi, 2.0) == pytest.approx(math.pi / 2)
    with pytest.raises(NonPositiveError):
        crescent_quotient_modulus(0.0, 1.0)
