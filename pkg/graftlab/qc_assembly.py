"""Piecewise comparison map between a 2π-grafted structure and the structure at t·M.

Branch rectangles are synthesized from the traintrack weights; the map is ξ on each
branch, concentric corrections η at switches, unit-collar corrections along the target's
horizontal edges and the identity on the complement of the traintrack.
"""
from __future__ import annotations

import logging
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from graftlab.cylinder_geometry import (
    TWO_PI,
    ChartTransfer,
    ConcentricAdjustment,
    EdgeProfile,
    EtaMap,
    ModifiedMetric,
    RectangleDomain,
    RoundCylinder,
    SupportedRectangle,
    XiMap,
    adjacent_offset_cylinder,
    chart_transfer,
    concentric_adjust,
    concentric_cylinder,
    is_nearly_circular,
    make_circular_rectangle,
    perturbed_rectangle,
    seam_mismatch,
    xi_map,
)
from graftlab.distortion import ChartDomain, SamplerConfig, estimate_distortion
from graftlab.errors import (
    CollarTooTallError,
    ExperimentFailedError,
    GraftlabError,
    GraftlabNumericError,
    IndexMismatchError,
    InvalidWeightsError,
    NonPositiveLeafLengthError,
)
from graftlab.models import DistortionEstimate, ExperimentConfig, ExperimentReport, ExperimentRow, NearnessParams
from graftlab.moebius_core import MoebiusMap
from graftlab.presets import resolve_track, resolve_weights
from graftlab.settings import SAMPLE_CHUNK, get_tolerances, worker_count
from graftlab.traintrack import (
    BranchEnd,
    IntegerWeights,
    TrainTrack,
    WeightVector,
    approximate_ray,
    validate_integer_weights,
    validate_weights,
)

LOGGER = logging.getLogger(__name__)

PAIR_STREAM = 21
ADJACENCY_STREAM = 22
SOURCE, TARGET = "source", "target"
COLLAR_HEIGHT = 1.0
COLLAR_PLACEMENTS = 16
SEAM_LIMIT = 1e-6


@dataclass(frozen=True)
class BranchModelPair:
    branch: str
    source: SupportedRectangle
    target: SupportedRectangle
    params: NearnessParams
    source_weight: float
    target_weight: float

    @property
    def width(self) -> float:
        return self.source.width


def default_widths(track: TrainTrack, widths: Optional[Dict[str, float]] = None) -> Dict[str, float]:
    """2π per branch unless overridden."""
    result = {b: TWO_PI for b in track.branches}
    for branch, value in (widths or {}).items():
        if branch not in result:
            raise IndexMismatchError(f"width given for unknown branch {branch}")
        result[branch] = float(value)
    return result


def _perturbed_model(stream: np.random.SeedSequence, width: float, leaf_length: float, delta: float) -> SupportedRectangle:
    rng = np.random.default_rng(stream)
    core = width + delta * float(rng.uniform(-1.0, 1.0))
    profile = EdgeProfile.draw(rng)
    return perturbed_rectangle(concentric_cylinder(1.0, math.exp(core)), leaf_length, delta, profile)


def synthesize_branch_pairs(
    track: TrainTrack,
    L: WeightVector,
    M: WeightVector,
    t: float,
    N: IntegerWeights,
    delta: float,
    seed: int,
    widths: Optional[Dict[str, float]] = None,
) -> List[BranchModelPair]:
    """Source rectangles carry L + 2πN, targets t·M.

    Source and target draw their host core and edge profile from separate child streams of
    (seed, branch), so a given seed reproduces both and the draws do not depend on t.
    """
    for name, weights in (("L", L), ("M", M)):
        report = validate_weights(track, weights)
        if not report.ok:
            raise InvalidWeightsError(f"{name} is not a measured lamination on the track", report)
    report = validate_integer_weights(track, N)
    if not report.ok:
        raise InvalidWeightsError("N violates the switch conditions", report)
    widths = default_widths(track, widths)
    source_weights = L.values + TWO_PI * N.values
    target_weights = float(t) * M.values
    pairs = []
    for i, branch in enumerate(track.branches):
        low = min(source_weights[i], target_weights[i])
        if low <= delta or low <= 0:
            raise NonPositiveLeafLengthError(
                f"branch {branch}: weight {low:.6g} leaves no room for perturbations of size {delta:g}"
            )
        streams = np.random.SeedSequence([seed, PAIR_STREAM, i]).spawn(2)
        source, target = (
            _perturbed_model(stream, widths[branch], float(weight), delta)
            for stream, weight in zip(streams, (source_weights[i], target_weights[i]))
        )
        eps = 2.0 * delta if delta > 0 else get_tolerances().geometric
        params = NearnessParams(eps=eps, K=max(0.0, min(widths.values()) - delta), delta=delta)
        pairs.append(BranchModelPair(branch, source, target, params, float(source_weights[i]), float(target_weights[i])))
    LOGGER.debug("Synthesized %d branch pairs at t=%g", len(pairs), t)
    return pairs


@dataclass(frozen=True)
class EndCorrection:
    """η expressed in branch coordinates; end 1 is reached through (u, v) ↦ (c − u, −v)."""

    eta: EtaMap
    end: int
    width: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        if self.end == 0:
            return self.eta(points)
        flipped = np.column_stack([self.width - points[:, 0], -points[:, 1]])
        moved = self.eta(flipped)
        return np.column_stack([points[:, 0], -moved[:, 1]])


@dataclass(frozen=True)
class AdjacencyCorrection:
    switch_id: str
    large: BranchEnd
    small: BranchEnd
    side: str
    adjustment: ConcentricAdjustment
    correction: EndCorrection
    large_rectangle: SupportedRectangle
    neighbour: RoundCylinder


def synthesize_adjacency(track: TrainTrack, pairs: Sequence[BranchModelPair], delta: float, seed: int) -> List[AdjacencyCorrection]:
    """Per switch and side: each small end's host is glued to the large end's host off-centre by ≤ δ."""
    by_branch = {p.branch: p for p in pairs}
    corrections = []
    for s, switch in enumerate(track.switches):
        reference = by_branch[switch.large[0].branch]
        for k, small in enumerate(switch.small):
            pair = by_branch[small.branch]
            for side_code, side in enumerate((SOURCE, TARGET)):
                rng = np.random.default_rng(np.random.SeedSequence([seed, ADJACENCY_STREAM, s, k, side_code]))
                offset = delta * float(rng.uniform(0.0, 1.0))
                direction = float(rng.uniform(0.0, TWO_PI))
                large = reference.source if side == SOURCE else reference.target
                width = pair.source.width if side == SOURCE else pair.target.width
                neighbour = adjacent_offset_cylinder(large.host, width, offset, direction)
                adjustment = concentric_adjust(large.host, neighbour)
                correction = EndCorrection(adjustment.eta, small.end, width)
                corrections.append(
                    AdjacencyCorrection(switch.id, switch.large[0], small, side, adjustment, correction, large, neighbour)
                )
    return corrections


def adjacency_seam(item: AdjacencyCorrection, samples: int = 64) -> float:
    """Two-sided mismatch on the circle where the small end's host meets the large end's host.

    The large rectangle is read in its own chart; the neighbour is carried there through the
    stored γ and η, and both position and metric along the circle are compared.
    """
    adjustment = item.adjustment
    left = ModifiedMetric(item.large_rectangle, ChartTransfer(MoebiusMap.identity()), item.large_rectangle.host)
    right = ModifiedMetric(
        make_circular_rectangle(item.neighbour, COLLAR_HEIGHT),
        chart_transfer(item.neighbour.chart, adjustment.gamma, adjustment.adjusted.chart),
        adjustment.adjusted,
        None if adjustment.eta.is_identity else adjustment.eta,
    )
    report = seam_mismatch([left, right], 1, samples)
    return max(report.position, report.metric)


@dataclass(frozen=True)
class CollarMap:
    """Linear on each vertical leaf: identity on the edge, the branch correction one unit inside."""

    correction: Callable[[np.ndarray], np.ndarray]
    nodes: np.ndarray
    edge_values: np.ndarray
    inward: int
    height: float = COLLAR_HEIGHT

    def edge(self, u: np.ndarray) -> np.ndarray:
        return np.interp(u, self.nodes, self.edge_values)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        u, v = points[:, 0], points[:, 1]
        edge = self.edge(u)
        fraction = self.inward * (v - edge) / self.height
        inner = edge + self.inward * self.height
        shift = self.correction(np.column_stack([u, inner]))[:, 1] - inner
        return np.column_stack([u, v + fraction * shift])


@dataclass(frozen=True)
class CollarDomain:
    collar: CollarMap
    margin: float = 0.02

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        nodes = self.collar.nodes
        segment = rng.integers(0, len(nodes) - 1, count)
        frac = rng.uniform(self.margin, 1.0 - self.margin, count)
        u = nodes[segment] + frac * (nodes[segment + 1] - nodes[segment])
        depth = rng.uniform(0.0, 1.0, count)
        return np.column_stack([u, self.collar.edge(u) + self.collar.inward * depth * self.collar.height])

    def local_scale(self, points: np.ndarray) -> np.ndarray:
        return np.ones(len(points))


def _compose(corrections: Sequence[EndCorrection]) -> Callable[[np.ndarray], np.ndarray]:
    def apply_all(points: np.ndarray) -> np.ndarray:
        for correction in corrections:
            points = correction(points)
        return points

    return apply_all


def _collars(rectangle: SupportedRectangle, correction: Callable[[np.ndarray], np.ndarray]) -> List[CollarMap]:
    """Collars at evenly spaced placements of each horizontal edge's profile around the circle."""
    collars = []
    for values, inward in ((rectangle.bottom_values, 1), (rectangle.top_values, -1)):
        profile = values - values[0]
        for k in range(COLLAR_PLACEMENTS):
            level = -math.pi + TWO_PI * k / COLLAR_PLACEMENTS
            collars.append(CollarMap(correction, rectangle.nodes, profile + level, inward))
    return collars


@dataclass
class AssembledMap:
    xi: Dict[str, XiMap]
    corrections: Dict[Tuple[str, str], List[EndCorrection]]
    adjacency: List[AdjacencyCorrection]
    collars: Dict[str, List[CollarMap]]
    pieces: List[DistortionEstimate] = field(default_factory=list)
    complement: DistortionEstimate = field(default_factory=lambda: DistortionEstimate(label="complement"))
    seam_max: float = 0.0

    @property
    def fold_free(self) -> bool:
        return all(piece.fold_free for piece in self.pieces)

    def global_estimate(self) -> DistortionEstimate:
        result = DistortionEstimate.dominating(self.pieces + [self.complement], label="global")
        result.seam_max = max(result.seam_max, self.seam_max)
        return result

    def summary_lines(self) -> List[str]:
        lines = []
        for piece in self.pieces:
            lines.extend(piece.summary_lines())
        lines.extend(self.global_estimate().summary_lines())
        return lines


def xi_boundary_residual(pair: BranchModelPair, xi: XiMap, samples: int = 65) -> float:
    """How far ξ carries the source boundary off the target rectangle's boundary."""
    source, target = pair.source, pair.target
    u = np.linspace(0.0, source.width, samples)
    worst = 0.0
    for edge, target_edge in ((source.bottom, target.bottom), (source.top, target.top)):
        image = xi(np.column_stack([u, edge(u)]))
        worst = max(worst, float(np.max(np.abs(image[:, 1] - target_edge(image[:, 0])))))
    v = np.linspace(0.0, 1.0, samples)
    for u_end, target_end in ((0.0, 0.0), (source.width, target.width)):
        column = source.bottom(u_end) + v * source.leaf_length(u_end)
        image = xi(np.column_stack([np.full_like(v, u_end), column]))
        worst = max(worst, float(np.max(np.abs(image[:, 0] - target_end))))
        low, high = target.bottom(target_end), target.top(target_end)
        outside = np.maximum(low - image[:, 1], 0.0) + np.maximum(image[:, 1] - high, 0.0)
        worst = max(worst, float(np.max(outside)))
    return worst


def _collar_residual(collar: CollarMap) -> float:
    u = np.linspace(collar.nodes[0], collar.nodes[-1], 65)
    edge = collar.edge(u)
    on_edge = collar(np.column_stack([u, edge]))
    inner = np.column_stack([u, edge + collar.inward * collar.height])
    return max(
        float(np.max(np.abs(on_edge[:, 1] - edge))),
        float(np.max(np.abs(collar(inner) - collar.correction(inner)))),
    )


def _piece_config(config: SamplerConfig, count: int, label: str) -> SamplerConfig:
    """Per-piece seed so pieces sample independently but reproducibly."""
    offset = zlib.crc32(label.encode("utf-8"))
    return replace(config, samples=max(SAMPLE_CHUNK, count), pairs=max(SAMPLE_CHUNK, min(config.pairs, count)), seed=config.seed + offset)


def assemble(
    pairs: Sequence[BranchModelPair],
    adjacency: Sequence[AdjacencyCorrection],
    config: Optional[SamplerConfig] = None,
    track: Optional[TrainTrack] = None,
) -> AssembledMap:
    config = config or SamplerConfig()
    by_branch = {p.branch: p for p in pairs}
    if track is not None and set(by_branch) != set(track.branches):
        raise IndexMismatchError("branch pairs do not cover the track")
    for item in adjacency:
        if item.small.branch not in by_branch or item.large.branch not in by_branch:
            raise IndexMismatchError(f"adjacency at {item.switch_id} names a branch without a rectangle pair")
    for pair in pairs:
        if pair.target.min_leaf_length() < 2.0 * COLLAR_HEIGHT:
            raise CollarTooTallError(
                f"branch {pair.branch}: leaf length {pair.target.min_leaf_length():.4g} cannot hold two unit collars"
            )

    pieces: List[DistortionEstimate] = []
    seam = 0.0
    xi_maps: Dict[str, XiMap] = {}
    for pair in pairs:
        xi = xi_map(pair.source, pair.target)
        xi_maps[pair.branch] = xi
        label = f"xi {pair.branch}"
        estimate = estimate_distortion(xi, RectangleDomain(pair.source), config=_piece_config(config, config.samples, label), label=label)
        estimate.seam_max = xi_boundary_residual(pair, xi)
        seam = max(seam, estimate.seam_max)
        pieces.append(estimate)

    corrections: Dict[Tuple[str, str], List[EndCorrection]] = {}
    for item in adjacency:
        two_sided = adjacency_seam(item)
        seam = max(seam, two_sided)
        if item.adjustment.eta.is_identity:
            continue
        corrections.setdefault((item.side, item.small.branch), []).append(item.correction)
        width = item.correction.width
        label = f"eta {item.side} {item.small.branch}:{item.small.end}"
        domain = ChartDomain((0.0, width), avoid=(width / 2.0,))
        estimate = estimate_distortion(item.adjustment.eta, domain, config=_piece_config(config, config.samples, label), label=label)
        estimate.seam_max = two_sided
        pieces.append(estimate)

    collars: Dict[str, List[CollarMap]] = {}
    per_collar = config.samples // COLLAR_PLACEMENTS
    for pair in pairs:
        active = corrections.get((TARGET, pair.branch))
        if not active:
            continue
        collars[pair.branch] = _collars(pair.target, _compose(active))
        for k, collar in enumerate(collars[pair.branch]):
            label = f"collar {pair.branch}#{k}"
            estimate = estimate_distortion(collar, CollarDomain(collar), config=_piece_config(config, per_collar, label), label=label)
            estimate.seam_max = _collar_residual(collar)
            seam = max(seam, estimate.seam_max)
            pieces.append(estimate)

    if seam >= SEAM_LIMIT:
        LOGGER.warning("Seam mismatch %.3g exceeds %.0e", seam, SEAM_LIMIT)
    assembled = AssembledMap(xi_maps, corrections, list(adjacency), collars, pieces, seam_max=seam)
    if not assembled.fold_free:
        LOGGER.warning("A sampled piece changes orientation")
    return assembled


def _integer_weights(track: TrainTrack, config: ExperimentConfig, M: WeightVector, t: float) -> Tuple[IntegerWeights, float]:
    if config.N is not None:
        N = IntegerWeights.from_mapping(track, config.N)
        achieved = float(np.max(np.abs(TWO_PI * N.values - t * M.values))) if track.size else 0.0
        return N, achieved
    result = approximate_ray(track, M, t)
    return result.m, result.D_achieved


def run_point(track: TrainTrack, L: WeightVector, M: WeightVector, t: float, config: ExperimentConfig) -> ExperimentRow:
    N, achieved = _integer_weights(track, config, M, t)
    pairs = synthesize_branch_pairs(track, L, M, t, N, config.delta, config.seed, config.widths)
    for pair in pairs:
        for rectangle in (pair.source, pair.target):
            report = is_nearly_circular(rectangle, pair.params)
            if not report:
                LOGGER.warning("Branch %s rectangle is not nearly circular: %s", pair.branch, "; ".join(report.reasons))
    adjacency = synthesize_adjacency(track, pairs, config.delta, config.seed)
    sampler = SamplerConfig(samples=config.samples, seed=config.seed)
    assembled = assemble(pairs, adjacency, sampler, track)
    estimate = assembled.global_estimate()
    row = ExperimentRow(
        t=float(t),
        delta=config.delta,
        N=N.as_dict(),
        D_achieved=achieved,
        pieces=assembled.pieces,
        A_est=estimate.A_est,
        B_est=estimate.B_est,
        K_qc_est=estimate.K_qc_est,
        seam_max=estimate.seam_max,
    )
    if not math.isfinite(row.teich_bound):
        raise GraftlabNumericError(f"teich_bound is not finite at t={t:g}")
    LOGGER.info("t=%g K_qc_est=%.9g teich_bound=%.6g", t, row.K_qc_est, row.teich_bound)
    return row


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """One row per t, in grid order; a failure raises with the rows computed so far."""
    track = resolve_track(config.track)
    L = resolve_weights(track, config.L, "L")
    M = resolve_weights(track, config.M, "M")
    report = ExperimentReport(delta=config.delta, seed=config.seed, samples=config.samples)
    grid = list(config.t_grid)
    if not grid:
        return report
    workers = min(worker_count(), len(grid))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_point, track, L, M, t, config) for t in grid]
        failure: Optional[BaseException] = None
        for t, future in zip(grid, futures):
            if failure is not None:
                future.cancel()
                continue
            try:
                report.rows.append(future.result())
            except GraftlabError as exc:
                failure = exc
                report.rows.append(ExperimentRow(t=float(t), delta=config.delta, N={}, D_achieved=float("nan"), error=str(exc)))
    if failure is not None:
        LOGGER.debug("Experiment stopped at t=%g", report.rows[-1].t)
        raise ExperimentFailedError(f"experiment failed at t={report.rows[-1].t:g}: {failure}", report.rows) from failure
    return report
