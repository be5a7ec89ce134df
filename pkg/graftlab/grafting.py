"""Thurston-coordinate bookkeeping: marked hyperbolic surfaces, grafting and Thurston-metric cylinders."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from graftlab.errors import (
    GraftlabValidationError,
    IndexMismatchError,
    InvalidWeightsError,
    NonPositiveError,
    NotLoxodromicError,
    TooLargeError,
    UnknownLoopError,
)
from graftlab.moebius_core import MapType, MoebiusMap, classify, translation_length
from graftlab.settings import get_tolerances
from graftlab.traintrack import (
    IntegerWeights,
    TrainTrack,
    WeightVector,
    validate_integer_weights,
    validate_weights,
)

LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
RELATION_TOLERANCE = 1e-8
SPLIT_SEARCH_NODES = 200_000


def commutator_relation(names: Sequence[str]) -> str:
    """a b A B c d C D ... for generator names (a, b, c, d, ...)."""
    word = []
    for first, second in zip(names[0::2], names[1::2]):
        word.append(f"{first}{second}{first.upper()}{second.upper()}")
    return "".join(word)


def invert_word(word: str) -> str:
    return word[::-1].swapcase()


@dataclass(frozen=True)
class FuchsianData:
    """Named generators (single lowercase letters) and the surface relation word."""

    generators: Dict[str, MoebiusMap]
    relation: str = ""

    def __post_init__(self) -> None:
        for name in self.generators:
            if len(name) != 1 or not name.islower():
                raise GraftlabValidationError(f"generator names must be single lowercase letters, got {name!r}")
        if not self.relation:
            object.__setattr__(self, "relation", commutator_relation(list(self.generators)))

    def holonomy(self, word: str) -> MoebiusMap:
        if not word:
            raise UnknownLoopError("empty holonomy word")
        result = MoebiusMap.identity()
        for letter in word:
            generator = self.generators.get(letter.lower())
            if generator is None:
                raise UnknownLoopError(f"unknown generator {letter!r} in word {word!r}")
            result = result.compose(generator if letter.islower() else generator.inverse())
        return result


@dataclass(frozen=True)
class LengthTable:
    lengths: Dict[str, float]

    def __post_init__(self) -> None:
        for loop_id, length in self.lengths.items():
            if not float(length) > 0:
                raise NonPositiveError(f"loop {loop_id} has non-positive length {length}")


Holonomy = Union[FuchsianData, LengthTable]


@dataclass(frozen=True)
class HyperbolicSurface:
    genus: int
    holonomy: Holonomy
    name: str = ""

    def __post_init__(self) -> None:
        if self.genus < 2:
            raise GraftlabValidationError(f"genus must be at least 2, got {self.genus}")
        if isinstance(self.holonomy, FuchsianData):
            self._check_fuchsian(self.holonomy)

    def _check_fuchsian(self, data: FuchsianData) -> None:
        if len(data.generators) != 2 * self.genus:
            raise GraftlabValidationError(
                f"genus {self.genus} needs {2 * self.genus} generators, got {len(data.generators)}"
            )
        for name, generator in data.generators.items():
            if not generator.is_real(RELATION_TOLERANCE):
                raise GraftlabValidationError(f"generator {name} is not real")
            if classify(generator) is not MapType.LOXODROMIC:
                raise NotLoxodromicError(f"generator {name} is not loxodromic")
        residual = relation_residual(data)
        if residual > RELATION_TOLERANCE:
            raise GraftlabValidationError(f"surface relation fails with residual {residual:.3g}")

    @property
    def hyperbolic_area(self) -> float:
        return 4.0 * math.pi * (self.genus - 1)

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any], name: str = "") -> "HyperbolicSurface":
        genus = int(payload.get("genus", 2))
        if "lengths" in payload:
            return cls(genus, LengthTable({str(k): float(v) for k, v in payload["lengths"].items()}), name)
        fuchsian = payload.get("fuchsian")
        if fuchsian is None:
            raise GraftlabValidationError("surface needs either 'fuchsian' or 'lengths'")
        raw = fuchsian["generators"]
        if isinstance(raw, Mapping):
            generators = {str(k): MoebiusMap.from_json(v) for k, v in raw.items()}
        else:
            letters = "abcdefghijklmnopqrstuvwxyz"
            generators = {letters[i]: MoebiusMap.from_json(v) for i, v in enumerate(raw)}
        return cls(genus, FuchsianData(generators, str(fuchsian.get("relation", ""))), name)

    def to_dict(self) -> Dict[str, Any]:
        if isinstance(self.holonomy, LengthTable):
            return {"genus": self.genus, "lengths": dict(self.holonomy.lengths)}
        return {
            "genus": self.genus,
            "fuchsian": {
                "generators": {k: g.to_json() for k, g in self.holonomy.generators.items()},
                "relation": self.holonomy.relation,
            },
        }


def relation_residual(data: FuchsianData) -> float:
    """Distance of the relation word's holonomy from ±I."""
    product = data.holonomy(data.relation).matrix
    eye = np.eye(2)
    return float(min(np.max(np.abs(product - eye)), np.max(np.abs(product + eye))))


def word_holonomy(surface: HyperbolicSurface, word: str) -> MoebiusMap:
    if not isinstance(surface.holonomy, FuchsianData):
        raise UnknownLoopError("surface has no Fuchsian data")
    return surface.holonomy.holonomy(word)


def geodesic_length(surface: HyperbolicSurface, loop: str) -> float:
    """Length of the closed geodesic named by a holonomy word or a length-table id."""
    if isinstance(surface.holonomy, LengthTable):
        if loop not in surface.holonomy.lengths:
            raise UnknownLoopError(f"loop {loop!r} not in length table")
        return float(surface.holonomy.lengths[loop])
    holonomy = word_holonomy(surface, loop)
    if holonomy.isclose(MoebiusMap.identity(), RELATION_TOLERANCE):
        raise NotLoxodromicError(f"word {loop!r} has trivial holonomy")
    return translation_length(holonomy)


def systole_constant(surface: HyperbolicSurface) -> float:
    """A third of the shortest generator (or table) length."""
    if isinstance(surface.holonomy, LengthTable):
        return min(surface.holonomy.lengths.values()) / 3.0
    return min(geodesic_length(surface, name) for name in surface.holonomy.generators) / 3.0


@dataclass(frozen=True)
class WeightedLoop:
    """A closed loop carried by the track: label (word or loop id), weight in radians, branch path."""

    label: str
    weight: float
    branches: Tuple[str, ...]

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "WeightedLoop":
        return cls(str(payload["label"]), float(payload["weight"]), tuple(str(b) for b in payload["branches"]))

    def counts(self, track: TrainTrack) -> np.ndarray:
        index = track.branch_index
        vec = np.zeros(track.size)
        for branch in self.branches:
            if branch not in index:
                raise IndexMismatchError(f"loop {self.label} uses unknown branch {branch}")
            vec[index[branch]] += 1
        return vec


@dataclass(frozen=True)
class ThurstonCoords:
    surface: HyperbolicSurface
    track: TrainTrack
    lamination: WeightVector
    realization: Tuple[WeightedLoop, ...] = ()
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class GraftingCylinderData:
    loop_id: str
    length: float
    weight: float

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise NonPositiveError(f"cylinder circumference must be positive, got {self.length}")
        if self.weight < 0:
            raise NonPositiveError(f"cylinder height must be nonnegative, got {self.weight}")

    @property
    def modulus(self) -> float:
        return self.weight / self.length

    @property
    def area(self) -> float:
        return self.length * self.weight


@dataclass
class ThurstonMetricSummary:
    genus: int
    hyperbolic_area: float
    cylinders: List[GraftingCylinderData] = field(default_factory=list)

    @property
    def total_area(self) -> float:
        return self.hyperbolic_area + sum(c.area for c in self.cylinders)

    def summary_lines(self) -> List[str]:
        lines = [f"Hyperbolic part (genus {self.genus}): area {self.hyperbolic_area:.12g}"]
        for cyl in self.cylinders:
            lines.append(
                f"Cylinder {cyl.loop_id}: circumference {cyl.length:.12g}, height {cyl.weight:.12g}, modulus {cyl.modulus:.12g}"
            )
        lines.append(f"Total area: {self.total_area:.12g}")
        return lines


def _realized_lamination(track: TrainTrack, realization: Sequence[WeightedLoop]) -> np.ndarray:
    total = np.zeros(track.size)
    for loop in realization:
        total += loop.weight * loop.counts(track)
    return total


def graft(
    surface: HyperbolicSurface,
    track: TrainTrack,
    lamination: WeightVector,
    realization: Sequence[WeightedLoop] = (),
) -> ThurstonCoords:
    """Pair a surface with a lamination on a track; the pair is the projective structure."""
    report = validate_weights(track, lamination)
    if not report.ok:
        raise InvalidWeightsError("lamination violates the switch conditions", report)
    realization = tuple(realization)
    for loop in realization:
        if loop.weight < 0:
            raise InvalidWeightsError(f"loop {loop.label} has negative weight")
        geodesic_length(surface, loop.label)
    if realization:
        realized = _realized_lamination(track, realization)
        scale = max(1.0, float(np.max(np.abs(lamination.values))))
        if np.max(np.abs(realized - lamination.values)) > get_tolerances().geometric * scale:
            raise InvalidWeightsError("realization does not reproduce the lamination")
    LOGGER.debug("Grafted %s along %d loops", surface.name or f"genus-{surface.genus} surface", len(realization))
    return ThurstonCoords(surface, track, lamination, realization, {"holonomy_preserved": True})


def _redistribute(
    track: TrainTrack, realization: Tuple[WeightedLoop, ...], N: IntegerWeights
) -> Optional[Tuple[WeightedLoop, ...]]:
    """Spread 2πN over realization loops when N is a nonnegative integer combination of them."""
    if not np.any(N.values):
        return realization
    if not realization:
        return None
    columns = np.stack([loop.counts(track) for loop in realization], axis=1).astype(np.int64)
    split = _integer_split(columns, np.asarray(N.values, dtype=np.int64))
    if split is None:
        return None
    return tuple(
        WeightedLoop(loop.label, loop.weight + TWO_PI * float(k), loop.branches)
        for loop, k in zip(realization, split)
    )


def _integer_split(columns: np.ndarray, target: np.ndarray, max_nodes: int = SPLIT_SEARCH_NODES) -> Optional[np.ndarray]:
    """Nonnegative integers k with columns @ k == target, earlier loops taking as much as they can."""
    count = columns.shape[1]
    nodes = 0

    def search(j: int, remaining: np.ndarray) -> Optional[List[int]]:
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise TooLargeError(f"integer split search exceeded {max_nodes} steps")
        if j == count:
            return [] if not np.any(remaining) else None
        column = columns[:, j]
        used = column > 0
        top = int(np.min(remaining[used] // column[used])) if np.any(used) else 0
        for k in range(top, -1, -1):
            rest = search(j + 1, remaining - k * column)
            if rest is not None:
                return [k] + rest
        return None

    found = search(0, target)
    return None if found is None else np.asarray(found, dtype=np.int64)


def two_pi_graft(coords: ThurstonCoords, N: IntegerWeights) -> ThurstonCoords:
    """Add 2π·N to the lamination; the holonomy is unchanged."""
    if tuple(N.branch_ids) != coords.track.branches:
        raise IndexMismatchError("integer weights live on a different traintrack")
    report = validate_integer_weights(coords.track, N)
    if not report.ok:
        raise InvalidWeightsError("integer weights violate the switch conditions", report)
    lamination = coords.lamination.add(N.to_real().scale(TWO_PI))
    realization = _redistribute(coords.track, coords.realization, N)
    if realization is None:
        LOGGER.warning("Grafting weights are not a combination of the realized loops; dropping the realization")
        realization = ()
    metadata = dict(coords.metadata)
    previous = metadata.get("grafting_weights", {b: 0 for b in coords.track.branches})
    metadata["grafting_weights"] = {b: int(previous.get(b, 0)) + N[b] for b in coords.track.branches}
    metadata["holonomy_preserved"] = True
    return ThurstonCoords(coords.surface, coords.track, lamination, realization, metadata)


def thurston_metric_summary(coords: ThurstonCoords) -> ThurstonMetricSummary:
    summary = ThurstonMetricSummary(coords.surface.genus, coords.surface.hyperbolic_area)
    if np.any(coords.lamination.values > get_tolerances().geometric) and not coords.realization:
        raise UnknownLoopError("lamination has no closed-loop realization")
    for loop in coords.realization:
        if loop.weight <= 0:
            continue
        summary.cylinders.append(
            GraftingCylinderData(loop.label, geodesic_length(coords.surface, loop.label), loop.weight)
        )
    return summary


def crescent_quotient_modulus(theta: float, a: float) -> float:
    """Modulus of the strip R × [0, θ] modulo translation by a."""
    if not theta > 0 or not a > 0:
        raise NonPositiveError(f"crescent angle and translation must be positive, got ({theta}, {a})")
    return theta / a


def is_admissible_holonomy(g: MoebiusMap) -> bool:
    return classify(g) is MapType.LOXODROMIC
