"""Weighted traintracks: switch conditions, weight cones, multiloops and integer ray approximation."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from graftlab.errors import (
    IndexMismatchError,
    InfeasibleError,
    InvalidWeightsError,
    NonPositiveError,
    TooLargeError,
)
from graftlab.settings import get_tolerances

LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
MAX_CONE_BRANCHES = 24
FULL_NEIGHBOURHOOD_MAX_GENERATORS = 6
BRUTE_FORCE_MAX_CANDIDATES = 500_000
MAX_SEARCH_STEPS = 100_000


@dataclass(frozen=True)
class BranchEnd:
    branch: str
    end: int

    def __post_init__(self) -> None:
        if self.end not in (0, 1):
            raise InvalidWeightsError(f"branch end must be 0 or 1, got {self.end!r}")

    @classmethod
    def coerce(cls, raw: Any) -> "BranchEnd":
        if isinstance(raw, BranchEnd):
            return raw
        if isinstance(raw, Mapping):
            return cls(str(raw["branch"]), int(raw["end"]))
        branch, end = raw
        return cls(str(branch), int(end))

    def to_json(self) -> List[Any]:
        return [self.branch, self.end]


@dataclass(frozen=True)
class Switch:
    """A switch: one large end facing one (degree 2) or two (degree 3) small ends."""

    id: str
    large: Tuple[BranchEnd, ...]
    small: Tuple[BranchEnd, ...]

    @property
    def degree(self) -> int:
        return len(self.large) + len(self.small)

    @property
    def ends(self) -> Tuple[BranchEnd, ...]:
        return self.large + self.small


def _coerce_ends(raw: Any) -> Tuple[BranchEnd, ...]:
    if isinstance(raw, Sequence) and len(raw) == 2 and isinstance(raw[0], str) and not isinstance(raw[1], (list, dict)):
        return (BranchEnd.coerce(raw),)
    return tuple(BranchEnd.coerce(item) for item in raw)


@dataclass(frozen=True)
class TrainTrack:
    branches: Tuple[str, ...]
    switches: Tuple[Switch, ...]
    connected: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "branches", tuple(str(b) for b in self.branches))
        object.__setattr__(self, "switches", tuple(self.switches))
        self._validate()

    def _validate(self) -> None:
        if not self.branches:
            raise InvalidWeightsError("a traintrack needs at least one branch")
        if len(set(self.branches)) != len(self.branches):
            raise InvalidWeightsError("branch ids must be unique")
        if len({s.id for s in self.switches}) != len(self.switches):
            raise InvalidWeightsError("switch ids must be unique")
        known = set(self.branches)
        seen: Dict[Tuple[str, int], str] = {}
        for switch in self.switches:
            if len(switch.large) != 1 or len(switch.small) not in (1, 2):
                raise InvalidWeightsError(
                    f"switch {switch.id} must have one large end and one or two small ends"
                )
            for end in switch.ends:
                if end.branch not in known:
                    raise IndexMismatchError(f"switch {switch.id} references unknown branch {end.branch}")
                key = (end.branch, end.end)
                if key in seen:
                    raise InvalidWeightsError(
                        f"branch end {key} attached to both {seen[key]} and {switch.id}"
                    )
                seen[key] = switch.id
        missing = [(b, e) for b in self.branches for e in (0, 1) if (b, e) not in seen]
        if missing:
            raise InvalidWeightsError(f"unattached branch ends: {missing}")
        if self.connected and not self._is_connected(seen):
            raise InvalidWeightsError("traintrack is not connected; pass connected=False for several components")

    def _is_connected(self, seen: Dict[Tuple[str, int], str]) -> bool:
        adjacency: Dict[str, set] = {s.id: set() for s in self.switches}
        for branch in self.branches:
            left, right = seen[(branch, 0)], seen[(branch, 1)]
            adjacency[left].add(right)
            adjacency[right].add(left)
        start = self.switches[0].id
        stack, reached = [start], {start}
        while stack:
            for nxt in adjacency[stack.pop()]:
                if nxt not in reached:
                    reached.add(nxt)
                    stack.append(nxt)
        return len(reached) == len(self.switches)

    @property
    def branch_index(self) -> Dict[str, int]:
        return {b: i for i, b in enumerate(self.branches)}

    @property
    def size(self) -> int:
        return len(self.branches)

    def switch_of(self, branch: str, end: int) -> Tuple[Switch, bool]:
        """The switch holding a branch end, and whether the end sits on its small side."""
        for switch in self.switches:
            if BranchEnd(branch, end) in switch.large:
                return switch, False
            if BranchEnd(branch, end) in switch.small:
                return switch, True
        raise IndexMismatchError(f"branch end ({branch}, {end}) is not attached")

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "TrainTrack":
        branches = []
        for item in payload.get("branches", []):
            branches.append(str(item["id"]) if isinstance(item, Mapping) else str(item))
        switches = []
        for item in payload.get("switches", []):
            switches.append(
                Switch(
                    id=str(item["id"]),
                    large=_coerce_ends(item["large"]),
                    small=_coerce_ends(item["small"]),
                )
            )
        return cls(tuple(branches), tuple(switches), bool(payload.get("connected", True)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "branches": [{"id": b} for b in self.branches],
            "switches": [
                {
                    "id": s.id,
                    "large": [e.to_json() for e in s.large],
                    "small": [e.to_json() for e in s.small],
                }
                for s in self.switches
            ],
            "connected": self.connected,
        }


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Real weights indexed by branch id."""

    branch_ids: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (len(self.branch_ids),):
            raise IndexMismatchError("weight vector length does not match its branch ids")
        values.setflags(write=False)
        object.__setattr__(self, "branch_ids", tuple(self.branch_ids))
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, track: TrainTrack, weights: Mapping[str, Any]) -> "WeightVector":
        unknown = sorted(set(map(str, weights)) - set(track.branches))
        missing = [b for b in track.branches if b not in weights]
        if unknown or missing:
            raise IndexMismatchError(f"weights do not match branches (unknown {unknown}, missing {missing})")
        return cls(track.branches, np.array([float(weights[b]) for b in track.branches]))

    @classmethod
    def zeros(cls, track: TrainTrack) -> "WeightVector":
        return cls(track.branches, np.zeros(track.size))

    def __getitem__(self, branch: str) -> float:
        return float(self.values[self.branch_ids.index(branch)])

    def as_dict(self) -> Dict[str, float]:
        return {b: float(v) for b, v in zip(self.branch_ids, self.values)}

    def _check(self, other: "WeightVector") -> None:
        if self.branch_ids != other.branch_ids:
            raise IndexMismatchError("weight vectors live on different traintracks")

    def add(self, other: "WeightVector") -> "WeightVector":
        self._check(other)
        return WeightVector(self.branch_ids, self.values + other.values)

    def scale(self, factor: float) -> "WeightVector":
        if factor < 0:
            raise InvalidWeightsError("weights can only be scaled by a nonnegative factor")
        return WeightVector(self.branch_ids, float(factor) * self.values)

    __add__ = add

    def __mul__(self, factor: float) -> "WeightVector":
        return self.scale(factor)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class IntegerWeights:
    """Nonnegative integer strand counts indexed by branch id."""

    branch_ids: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape != (len(self.branch_ids),):
            raise IndexMismatchError("integer weight length does not match its branch ids")
        if values.size and not np.all(np.equal(np.mod(values, 1), 0)):
            raise InvalidWeightsError("integer weights must be integral")
        values = values.astype(np.int64)
        values.setflags(write=False)
        object.__setattr__(self, "branch_ids", tuple(self.branch_ids))
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, track: TrainTrack, weights: Mapping[str, Any]) -> "IntegerWeights":
        unknown = sorted(set(map(str, weights)) - set(track.branches))
        missing = [b for b in track.branches if b not in weights]
        if unknown or missing:
            raise IndexMismatchError(f"weights do not match branches (unknown {unknown}, missing {missing})")
        return cls(track.branches, np.array([weights[b] for b in track.branches]))

    @classmethod
    def zeros(cls, track: TrainTrack) -> "IntegerWeights":
        return cls(track.branches, np.zeros(track.size, dtype=np.int64))

    def __getitem__(self, branch: str) -> int:
        return int(self.values[self.branch_ids.index(branch)])

    def as_dict(self) -> Dict[str, int]:
        return {b: int(v) for b, v in zip(self.branch_ids, self.values)}

    def to_real(self) -> WeightVector:
        return WeightVector(self.branch_ids, self.values.astype(float))

    def add(self, other: "IntegerWeights") -> "IntegerWeights":
        if self.branch_ids != other.branch_ids:
            raise IndexMismatchError("integer weights live on different traintracks")
        return IntegerWeights(self.branch_ids, self.values + other.values)


@dataclass
class SwitchViolation:
    switch_id: str
    residual: float


@dataclass
class WeightReport:
    """Outcome of validate_weights; residual = large − Σ small."""

    violations: List[SwitchViolation] = field(default_factory=list)
    negative: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.negative

    def summary_lines(self) -> List[str]:
        lines = [f"switch {v.switch_id}: residual {v.residual:.6g}" for v in self.violations]
        lines.extend(f"branch {b}: negative weight" for b in self.negative)
        return lines or ["weights satisfy every switch condition"]


@dataclass(frozen=True, eq=False)
class ApproxResult:
    t: float
    m: IntegerWeights
    D_achieved: float
    target: np.ndarray

    @property
    def errors(self) -> np.ndarray:
        """Per-branch 2π·m_i − t·w_i."""
        return TWO_PI * self.m.values - self.target


@dataclass(frozen=True)
class Multiloop:
    """Closed branch sequences; each loop lists the branches it traverses in order."""

    loops: Tuple[Tuple[str, ...], ...] = ()

    def __len__(self) -> int:
        return len(self.loops)

    def strand_counts(self, track: TrainTrack) -> IntegerWeights:
        index = track.branch_index
        counts = np.zeros(track.size, dtype=np.int64)
        for loop in self.loops:
            for branch in loop:
                counts[index[branch]] += 1
        return IntegerWeights(track.branches, counts)


def switch_matrix(track: TrainTrack) -> np.ndarray:
    """Integer switch-condition matrix: +1 on the large end, −1 on each small end."""
    index = track.branch_index
    matrix = np.zeros((len(track.switches), track.size), dtype=np.int64)
    for row, switch in enumerate(track.switches):
        for end in switch.large:
            matrix[row, index[end.branch]] += 1
        for end in switch.small:
            matrix[row, index[end.branch]] -= 1
    return matrix


def _check_index(track: TrainTrack, branch_ids: Tuple[str, ...]) -> None:
    if tuple(branch_ids) != track.branches:
        raise IndexMismatchError(
            f"weights indexed by {list(branch_ids)} but the traintrack has {list(track.branches)}"
        )


def validate_weights(track: TrainTrack, weights: WeightVector, tol: Optional[float] = None) -> WeightReport:
    _check_index(track, weights.branch_ids)
    tol = get_tolerances().geometric if tol is None else tol
    values = np.asarray(weights.values, dtype=float)
    scale = max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)
    residuals = switch_matrix(track) @ values
    report = WeightReport()
    for switch, residual in zip(track.switches, residuals):
        if abs(residual) > tol * scale:
            report.violations.append(SwitchViolation(switch.id, float(residual)))
    report.negative = [b for b, v in zip(track.branches, values) if v < -tol * scale]
    return report


def validate_integer_weights(track: TrainTrack, weights: IntegerWeights) -> WeightReport:
    _check_index(track, weights.branch_ids)
    residuals = switch_matrix(track) @ weights.values
    report = WeightReport()
    for switch, residual in zip(track.switches, residuals):
        if residual != 0:
            report.violations.append(SwitchViolation(switch.id, float(residual)))
    report.negative = [b for b, v in zip(track.branches, weights.values) if v < 0]
    return report


def _primitive(vector: Sequence[int]) -> Tuple[int, ...]:
    divisor = reduce(math.gcd, (abs(v) for v in vector), 0)
    if divisor <= 1:
        return tuple(int(v) for v in vector)
    return tuple(int(v) // divisor for v in vector)


def cone_basis(track: TrainTrack, max_branches: int = MAX_CONE_BRANCHES) -> List[IntegerWeights]:
    """Primitive integer extreme rays of {w ≥ 0 : switch conditions}, by double description."""
    n = track.size
    if n > max_branches:
        raise TooLargeError(f"cone enumeration is capped at {max_branches} branches, track has {n}")
    rays: List[Tuple[int, ...]] = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    for row in switch_matrix(track).tolist():
        if not any(row):
            continue
        products = [sum(r * v for r, v in zip(row, ray)) for ray in rays]
        zeros = [ray for ray, p in zip(rays, products) if p == 0]
        positive = [(ray, p) for ray, p in zip(rays, products) if p > 0]
        negative = [(ray, p) for ray, p in zip(rays, products) if p < 0]
        supports = [frozenset(i for i, v in enumerate(ray) if v == 0) for ray in rays]
        combined: List[Tuple[int, ...]] = []
        for pos, p in positive:
            zero_pos = frozenset(i for i, v in enumerate(pos) if v == 0)
            for neg, q in negative:
                common = zero_pos & frozenset(i for i, v in enumerate(neg) if v == 0)
                adjacent = all(
                    not common <= other or ray in (pos, neg)
                    for ray, other in zip(rays, supports)
                )
                if not adjacent:
                    continue
                combined.append(_primitive([p * b - q * a for a, b in zip(pos, neg)]))
        rays = sorted(set(zeros) | set(combined))
    rays = sorted({_primitive(r) for r in rays if any(r)}, reverse=True)
    LOGGER.debug("Cone of %d branches has %d extreme rays", n, len(rays))
    return [IntegerWeights(track.branches, np.array(r, dtype=np.int64)) for r in rays]


def _objective(m: np.ndarray, target: np.ndarray) -> np.ndarray:
    return np.max(np.abs(TWO_PI * m - target), axis=-1)


def _moves(k: int) -> np.ndarray:
    if k <= FULL_NEIGHBOURHOOD_MAX_GENERATORS:
        grid = np.array(list(itertools.product((-1, 0, 1), repeat=k)), dtype=np.int64)
        return grid[np.any(grid != 0, axis=1)]
    eye = np.eye(k, dtype=np.int64)
    return np.concatenate([eye, -eye])


def brute_force_ray(
    track: TrainTrack,
    weights: WeightVector,
    t: float,
    bound: float,
    max_candidates: int = BRUTE_FORCE_MAX_CANDIDATES,
) -> Optional[ApproxResult]:
    """Exhaustive minimiser over integer switch solutions m with max|2πm − t·w| ≤ bound."""
    _check_index(track, weights.branch_ids)
    target = float(t) * np.asarray(weights.values, dtype=float)
    lows = np.maximum(np.ceil((target - bound) / TWO_PI - 1e-12), 0).astype(np.int64)
    highs = np.floor((target + bound) / TWO_PI + 1e-12).astype(np.int64)
    if np.any(highs < lows):
        return None
    sizes = highs - lows + 1
    total = int(np.prod(sizes.astype(object)))
    if total > max_candidates:
        raise TooLargeError(f"brute-force box has {total} candidates (cap {max_candidates})")
    grids = np.meshgrid(*[np.arange(lo, hi + 1) for lo, hi in zip(lows, highs)], indexing="ij")
    candidates = np.stack([g.reshape(-1) for g in grids], axis=1)
    valid = np.all(candidates @ switch_matrix(track).T == 0, axis=1)
    candidates = candidates[valid]
    if candidates.size == 0:
        return None
    scores = _objective(candidates, target)
    best = int(np.argmin(scores))
    if scores[best] > bound + 1e-12:
        return None
    return ApproxResult(float(t), IntegerWeights(track.branches, candidates[best]), float(scores[best]), target)


def approximate_ray(track: TrainTrack, weights: WeightVector, t: float) -> ApproxResult:
    """Integer weights m with exact switch conditions keeping max_i |2π m_i − t w_i| small.

    Rounding happens in generator coordinates so switch conditions hold by construction;
    a local search over generator moves follows, then an exhaustive polish when the
    box allowed by the current bound is small.
    """
    if not t > 0:
        raise NonPositiveError(f"scale t must be positive, got {t}")
    report = validate_weights(track, weights)
    if not report.ok:
        raise InvalidWeightsError("weights violate the switch conditions", report)
    target = float(t) * np.asarray(weights.values, dtype=float)
    generators = cone_basis(track)
    if not generators:
        if np.any(target > get_tolerances().geometric):
            raise InfeasibleError("switch cone is trivial but weights are not zero")
        zero = IntegerWeights.zeros(track)
        return ApproxResult(float(t), zero, float(_objective(zero.values, target)), target)
    basis = np.stack([g.values for g in generators])
    coeffs, *_ = np.linalg.lstsq(basis.T.astype(float), target / TWO_PI, rcond=None)
    lam = np.clip(np.sign(coeffs) * np.floor(np.abs(coeffs) + 0.5), 0, None).astype(np.int64)
    moves = _moves(len(generators))
    current = float(_objective(lam @ basis, target))
    for step in range(MAX_SEARCH_STEPS):
        trial = lam[None, :] + moves
        allowed = np.all(trial >= 0, axis=1)
        if not np.any(allowed):
            break
        scores = np.where(allowed, _objective(trial @ basis, target), np.inf)
        best = int(np.argmin(scores))
        if scores[best] >= current - 1e-12:
            break
        lam, current = trial[best], float(scores[best])
    else:  # pragma: no cover
        LOGGER.warning("Local search stopped after %d steps", MAX_SEARCH_STEPS)
    result = ApproxResult(float(t), IntegerWeights(track.branches, lam @ basis), current, target)
    try:
        polished = brute_force_ray(track, weights, t, current)
    except TooLargeError:
        polished = None
    if polished is not None and polished.D_achieved < result.D_achieved - 1e-12:
        result = polished
    LOGGER.debug("approximate_ray t=%g D_achieved=%.6g", t, result.D_achieved)
    return result


def _strand_order(count: int, end: int, on_small_side: bool) -> List[int]:
    ordered = list(range(count))
    return ordered if (end == 0) == on_small_side else ordered[::-1]


def trace_multiloop(track: TrainTrack, m: IntegerWeights) -> Multiloop:
    """Lay m_i parallel strands on each branch, match them across switches and extract loops."""
    report = validate_integer_weights(track, m)
    if not report.ok:
        raise InvalidWeightsError("integer weights violate the switch conditions", report)
    counts = m.as_dict()
    partner: Dict[Tuple[str, int, int], Tuple[str, int, int]] = {}
    for switch in track.switches:
        large = [
            (e.branch, k, e.end)
            for e in switch.large
            for k in _strand_order(counts[e.branch], e.end, False)
        ]
        small = [
            (e.branch, k, e.end)
            for e in switch.small
            for k in _strand_order(counts[e.branch], e.end, True)
        ]
        if len(large) != len(small):  # pragma: no cover - excluded by validation
            raise InvalidWeightsError(f"strand counts differ across switch {switch.id}")
        for left, right in zip(large, small):
            partner[left] = right
            partner[right] = left
    visited = set()
    loops: List[Tuple[str, ...]] = []
    for branch in track.branches:
        for k in range(counts[branch]):
            if (branch, k) in visited:
                continue
            path: List[str] = []
            current, entry = (branch, k), 0
            while current not in visited:
                visited.add(current)
                path.append(current[0])
                exit_end = 1 - entry
                nxt_branch, nxt_k, nxt_end = partner[(current[0], current[1], exit_end)]
                current, entry = (nxt_branch, nxt_k), nxt_end
            loops.append(tuple(path))
    LOGGER.debug("Traced %d loops from %d strands", len(loops), int(np.sum(m.values)))
    return Multiloop(tuple(loops))


def add_weights(first: WeightVector, second: WeightVector) -> WeightVector:
    return first.add(second)


def scale_weights(weights: WeightVector, factor: float) -> WeightVector:
    return weights.scale(factor)
