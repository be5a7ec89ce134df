import math

import pytest

from graftlab.errors import GraftlabValidationError, IndexMismatchError, UnknownPresetError
from graftlab.presets import (
    REGISTRY,
    PresetRegistry,
    genus2_weights,
    resolve_surface,
    resolve_track,
    resolve_weights,
    theta_track,
)
from graftlab.traintrack import WeightVector, validate_weights


def test_validate_all_covers_every_preset():
    lines = REGISTRY.validate_all()
    names = REGISTRY.names()
    assert len(lines) == sum(len(v) for v in names.values())
    assert lines[0].startswith("surface bolza: genus 2")


def test_weight_presets_sit_on_their_track(genus2_track):
    track, weights = REGISTRY.weights("genus2-track-A/M")
    assert track.branches == genus2_track.branches
    assert weights["c2"] == pytest.approx(math.sqrt(2.0))
    assert weights["B3"] == pytest.approx(math.sqrt(2.0) + (math.sqrt(5.0) - 1.0) / 2.0)
    assert validate_weights(track, weights).ok


def test_genus2_weights_satisfy_switches(genus2_track):
    weights = WeightVector.from_mapping(genus2_track, genus2_weights(0.3, 2.0, 7.0))
    assert validate_weights(genus2_track, weights).ok


def test_unknown_names_raise():
    with pytest.raises(UnknownPresetError):
        REGISTRY.track("missing")
    with pytest.raises(UnknownPresetError):
        REGISTRY.surface("missing")
    with pytest.raises(UnknownPresetError):
        REGISTRY.weights("missing")


def test_resolvers_accept_names_and_objects(genus2_track):
    assert resolve_track("theta").branches == ("b1", "b2", "b3")
    inline = resolve_track(theta_track().to_dict())
    assert inline.branches == ("b1", "b2", "b3")
    assert resolve_surface({"genus": 2, "lengths": {"g": 1.0}}).genus == 2
    weights = resolve_weights(genus2_track, "genus2-track-A/L", "L")
    assert weights["c5"] == pytest.approx(1.1)
    with pytest.raises(GraftlabValidationError):
        resolve_weights(theta_track(), "genus2-track-A/L", "L")
    with pytest.raises(IndexMismatchError):
        resolve_weights(genus2_track, {"B1": 1.0}, "L")
    with pytest.raises(GraftlabValidationError):
        resolve_track(3)


def test_registry_rejects_inconsistent_weight_presets():
    registry = PresetRegistry()
    registry.register_track("theta", theta_track)
    registry.register_weights("theta/bad", "theta", {"b1": 1.0, "b2": 1.0, "b3": 5.0})
    with pytest.raises(GraftlabValidationError):
        registry.validate_all()
