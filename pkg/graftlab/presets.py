"""Named surfaces, traintracks and weight vectors shipped with graftlab."""
from __future__ import annotations

import logging
import math
from typing import Any, Callable, Dict, List, Mapping, Tuple

import numpy as np

from graftlab.errors import GraftlabValidationError, UnknownPresetError
from graftlab.grafting import FuchsianData, HyperbolicSurface, systole_constant
from graftlab.moebius_core import MoebiusMap
from graftlab.traintrack import TrainTrack, WeightVector, cone_basis, validate_weights

LOGGER = logging.getLogger(__name__)

BOLZA_RELATION = "aBcDAbCd"


def _disk_to_upper(alpha: complex, beta: complex) -> MoebiusMap:
    """Conjugate [[α, β], [β̄, ᾱ]] from the disk to the upper half-plane."""
    return MoebiusMap.from_entries(
        alpha.real + beta.real,
        alpha.imag - beta.imag,
        -alpha.imag - beta.imag,
        alpha.real - beta.real,
    )


def bolza_surface() -> HyperbolicSurface:
    """Genus 2 from the regular octagon with opposite sides paired."""
    alpha = 1.0 + math.sqrt(2.0)
    beta = math.sqrt(2.0 + 2.0 * math.sqrt(2.0))
    generators = {}
    for k, name in enumerate("abcd"):
        rotated = beta * np.exp(1j * k * math.pi / 4.0)
        generators[name] = _disk_to_upper(complex(alpha), complex(rotated))
    return HyperbolicSurface(2, FuchsianData(generators, BOLZA_RELATION), name="bolza")


def _track(branches: List[str], switches: List[Tuple[str, List[List[Any]], List[List[Any]]]], connected: bool = True) -> TrainTrack:
    return TrainTrack.from_dict(
        {
            "branches": branches,
            "switches": [{"id": sid, "large": large, "small": small} for sid, large, small in switches],
            "connected": connected,
        }
    )


def genus2_track_a() -> TrainTrack:
    """Nine branches and six trivalent switches; weights are fixed by (c1, c2, c5)."""
    return _track(
        ["B1", "B2", "B3", "c1", "c2", "c3", "c4", "c5", "c6"],
        [
            ("S1", [["B1", 0]], [["c1", 0], ["c2", 0]]),
            ("S2", [["B1", 1]], [["c3", 0], ["c4", 0]]),
            ("S3", [["B2", 0]], [["c1", 1], ["c5", 0]]),
            ("S4", [["B2", 1]], [["c3", 1], ["c6", 0]]),
            ("S5", [["B3", 0]], [["c2", 1], ["c5", 1]]),
            ("S6", [["B3", 1]], [["c4", 1], ["c6", 1]]),
        ],
    )


def single_loop_track() -> TrainTrack:
    return _track(["b"], [("S", [["b", 1]], [["b", 0]])])


def theta_track() -> TrainTrack:
    return _track(
        ["b1", "b2", "b3"],
        [
            ("S1", [["b3", 0]], [["b1", 0], ["b2", 0]]),
            ("S2", [["b3", 1]], [["b1", 1], ["b2", 1]]),
        ],
    )


def two_loop_track() -> TrainTrack:
    return _track(
        ["p", "q"],
        [("Sp", [["p", 1]], [["p", 0]]), ("Sq", [["q", 1]], [["q", 0]])],
        connected=False,
    )


def genus2_weights(a: float, b: float, e: float) -> Dict[str, float]:
    return {"B1": a + b, "B2": a + e, "B3": b + e, "c1": a, "c2": b, "c3": a, "c4": b, "c5": e, "c6": e}


class PresetRegistry:
    """Lazily built presets, validated by their module checks when loaded."""

    def __init__(self) -> None:
        self._surfaces: Dict[str, Callable[[], HyperbolicSurface]] = {}
        self._tracks: Dict[str, Callable[[], TrainTrack]] = {}
        self._weights: Dict[str, Tuple[str, Dict[str, float]]] = {}

    def register_surface(self, name: str, factory: Callable[[], HyperbolicSurface]) -> None:
        self._surfaces[name] = factory

    def register_track(self, name: str, factory: Callable[[], TrainTrack]) -> None:
        self._tracks[name] = factory

    def register_weights(self, name: str, track: str, weights: Mapping[str, float]) -> None:
        self._weights[name] = (track, dict(weights))

    def names(self) -> Dict[str, List[str]]:
        return {
            "surfaces": sorted(self._surfaces),
            "tracks": sorted(self._tracks),
            "weights": sorted(self._weights),
        }

    def surface(self, name: str) -> HyperbolicSurface:
        if name not in self._surfaces:
            raise UnknownPresetError(f"unknown surface preset {name!r}")
        return self._surfaces[name]()

    def track(self, name: str) -> TrainTrack:
        if name not in self._tracks:
            raise UnknownPresetError(f"unknown track preset {name!r}")
        return self._tracks[name]()

    def weights(self, name: str) -> Tuple[TrainTrack, WeightVector]:
        if name not in self._weights:
            raise UnknownPresetError(f"unknown weight preset {name!r}")
        track_name, values = self._weights[name]
        track = self.track(track_name)
        return track, WeightVector.from_mapping(track, values)

    def validate_all(self) -> List[str]:
        """Build every preset and run its validators; returns summary lines."""
        lines = []
        for name in sorted(self._surfaces):
            surface = self.surface(name)
            lines.append(f"surface {name}: genus {surface.genus}, systole/3 = {systole_constant(surface):.6f}")
        for name in sorted(self._tracks):
            track = self.track(name)
            generators = cone_basis(track)
            if not generators:
                raise GraftlabValidationError(f"track {name} carries no weights")
            lines.append(f"track {name}: {track.size} branches, {len(track.switches)} switches, {len(generators)} cone generators")
        for name in sorted(self._weights):
            track, weights = self.weights(name)
            report = validate_weights(track, weights)
            if not report.ok:
                raise GraftlabValidationError(f"weights {name} fail: {'; '.join(report.summary_lines())}")
            lines.append(f"weights {name}: ok")
        LOGGER.info("Validated %d presets", len(lines))
        return lines


def default_registry() -> PresetRegistry:
    registry = PresetRegistry()
    registry.register_surface("bolza", bolza_surface)
    registry.register_track("genus2-track-A", genus2_track_a)
    registry.register_track("single-loop", single_loop_track)
    registry.register_track("theta", theta_track)
    registry.register_track("two-loop", two_loop_track)
    registry.register_weights("genus2-track-A/M", "genus2-track-A", genus2_weights(1.0, math.sqrt(2.0), (math.sqrt(5.0) - 1.0) / 2.0))
    registry.register_weights("genus2-track-A/L", "genus2-track-A", genus2_weights(0.8, 0.6, 1.1))
    registry.register_weights("theta/unit", "theta", {"b1": 1.0, "b2": 1.0, "b3": 2.0})
    return registry


REGISTRY = default_registry()


def resolve_track(raw: Any) -> TrainTrack:
    """A preset name or an inline track object."""
    if isinstance(raw, str):
        return REGISTRY.track(raw)
    if isinstance(raw, Mapping):
        return TrainTrack.from_dict(raw)
    raise GraftlabValidationError("track must be a preset name or an object")


def resolve_surface(raw: Any) -> HyperbolicSurface:
    if isinstance(raw, str):
        return REGISTRY.surface(raw)
    if isinstance(raw, Mapping):
        return HyperbolicSurface.from_dict(raw)
    raise GraftlabValidationError("surface must be a preset name or an object")


def resolve_weights(track: TrainTrack, raw: Any, field_name: str) -> WeightVector:
    """A weight preset name or a branch → weight mapping."""
    if isinstance(raw, str):
        preset_track, weights = REGISTRY.weights(raw)
        if preset_track.branches != track.branches:
            raise GraftlabValidationError(f"{field_name} preset {raw!r} belongs to another track")
        return weights
    if isinstance(raw, Mapping):
        return WeightVector.from_mapping(track, raw)
    raise GraftlabValidationError(f"{field_name} must be a preset name or an object")
