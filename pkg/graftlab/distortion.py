"""Sampled distortion estimation for maps between chart domains.

A map is any callable taking an (n, 2) array of chart points to an (n, 2) array. Metrics are
callables returning (n, 2, 2) symmetric positive definite tensors; None stands for the flat
chart metric.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Protocol, Tuple

import numpy as np

from graftlab.errors import SingularJacobianError
from graftlab.models import DistortionEstimate
from graftlab.settings import SAMPLE_CHUNK, worker_count

LOGGER = logging.getLogger(__name__)

PointMap = Callable[[np.ndarray], np.ndarray]
Metric = Optional[Callable[[np.ndarray], np.ndarray]]

SINGULAR_RATIO = 1e-12
PATH_QUADRATURE = 8
POINTS_STREAM = 1
PAIRS_STREAM = 2


class SampleDomain(Protocol):
    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray: ...

    def local_scale(self, points: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class SamplerConfig:
    samples: int = 4096
    pairs: int = 1024
    seed: int = 42
    step: float = 1e-5
    chunk: int = SAMPLE_CHUNK


@dataclass(frozen=True)
class ChartDomain:
    """The box [s0, s1] × [v0, v1] of a log chart, keeping clear of the listed s values."""

    s_range: Tuple[float, float]
    v_range: Tuple[float, float] = (-np.pi, np.pi)
    avoid: Tuple[float, ...] = ()
    margin: float = 1e-3

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        s = rng.uniform(self.s_range[0], self.s_range[1], count)
        v = rng.uniform(self.v_range[0], self.v_range[1], count)
        for value in self.avoid:
            close = np.abs(s - value) < self.margin
            s = np.where(close, value + np.where(s >= value, self.margin, -self.margin), s)
        return np.column_stack([s, v])

    def local_scale(self, points: np.ndarray) -> np.ndarray:
        return np.ones(len(points))


def _chunks(count: int, size: int) -> List[slice]:
    return [slice(start, min(start + size, count)) for start in range(0, count, size)]


def _run_chunks(work: Callable[[slice], tuple], count: int, size: int) -> List[tuple]:
    pieces = _chunks(count, size)
    workers = min(worker_count(), max(1, len(pieces)))
    if workers == 1:
        return [work(piece) for piece in pieces]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, pieces))


def jacobians(mapping: PointMap, points: np.ndarray, steps: np.ndarray) -> np.ndarray:
    """Central finite-difference Jacobians, shape (n, 2, 2), columns ∂/∂s and ∂/∂v."""
    n = len(points)
    result = np.empty((n, 2, 2))
    for axis in range(2):
        plus = points.copy()
        minus = points.copy()
        plus[:, axis] += steps
        minus[:, axis] -= steps
        spread = plus[:, axis] - minus[:, axis]
        result[:, :, axis] = (mapping(plus) - mapping(minus)) / spread[:, None]
    return result


def _whitened(jac: np.ndarray, points: np.ndarray, images: np.ndarray, domain_metric: Metric, target_metric: Metric) -> np.ndarray:
    """Jacobian in orthonormal frames of the domain and target metrics."""
    if domain_metric is not None:
        lower = np.linalg.cholesky(domain_metric(points))
        jac = jac @ np.linalg.inv(np.swapaxes(lower, 1, 2))
    if target_metric is not None:
        lower = np.linalg.cholesky(target_metric(images))
        jac = np.swapaxes(lower, 1, 2) @ jac
    return jac


def path_length(start: np.ndarray, end: np.ndarray, metric: Metric) -> np.ndarray:
    """Length of the straight chart segment between rows of start and end."""
    delta = end - start
    if metric is None:
        return np.linalg.norm(delta, axis=1)
    total = np.zeros(len(start))
    for k in range(PATH_QUADRATURE):
        mid = start + (k + 0.5) / PATH_QUADRATURE * delta
        tensor = metric(mid)
        total += np.sqrt(np.einsum("ni,nij,nj->n", delta, tensor, delta))
    return total / PATH_QUADRATURE


def estimate_distortion(
    mapping: PointMap,
    domain: SampleDomain,
    domain_metric: Metric = None,
    target_metric: Metric = None,
    config: Optional[SamplerConfig] = None,
    label: str = "",
) -> DistortionEstimate:
    """Sample A (bilipschitz), B (rough isometry) and K (dilatation) of a chart map."""
    config = config or SamplerConfig()
    points_rng = np.random.default_rng(np.random.SeedSequence([config.seed, POINTS_STREAM]))
    pairs_rng = np.random.default_rng(np.random.SeedSequence([config.seed, PAIRS_STREAM]))
    points = domain.sample(points_rng, config.samples)
    starts = domain.sample(pairs_rng, config.pairs)
    ends = domain.sample(pairs_rng, config.pairs)

    def pointwise(part: slice) -> tuple:
        chunk = points[part]
        steps = config.step * domain.local_scale(chunk)
        jac = jacobians(mapping, chunk, steps)
        det = np.linalg.det(jac)
        images = mapping(chunk)
        sigma = np.linalg.svd(_whitened(jac, chunk, images, domain_metric, target_metric), compute_uv=False)
        largest, smallest = sigma[:, 0], sigma[:, 1]
        singular = smallest <= SINGULAR_RATIO * np.maximum(largest, 1e-300)
        if np.any(singular):
            where = chunk[int(np.argmax(singular))]
            raise SingularJacobianError("sampled Jacobian is singular", tuple(float(x) for x in where))
        A = float(np.max(np.maximum(largest, 1.0 / smallest)))
        K = float(np.max(largest / smallest))
        return A, K, bool(np.all(det > 0)), bool(np.all(det < 0))

    def pairwise(part: slice) -> tuple:
        p, q = starts[part], ends[part]
        before = path_length(p, q, domain_metric)
        after = path_length(mapping(p), mapping(q), target_metric)
        return (float(np.max(np.abs(after - before))) if len(p) else 0.0,)

    point_results = _run_chunks(pointwise, len(points), config.chunk)
    pair_results = _run_chunks(pairwise, len(starts), config.chunk)
    A = max([1.0] + [r[0] for r in point_results])
    K = max([1.0] + [r[1] for r in point_results])
    positive = all(r[2] for r in point_results)
    negative = all(r[3] for r in point_results)
    B = max([0.0] + [r[0] for r in pair_results])
    LOGGER.debug("%s: A=%.9g B=%.9g K=%.9g over %d samples", label or "map", A, B, K, len(points))
    return DistortionEstimate(
        A_est=A,
        B_est=B,
        K_qc_est=K,
        samples=len(points),
        fold_free=positive or negative,
        label=label,
    )


def sup_displacement(mapping: PointMap, domain: SampleDomain, config: Optional[SamplerConfig] = None) -> float:
    """Largest flat chart distance between a sampled point and its image."""
    config = config or SamplerConfig()
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, POINTS_STREAM]))
    points = domain.sample(rng, config.samples)
    results = _run_chunks(
        lambda part: (float(np.max(np.linalg.norm(mapping(points[part]) - points[part], axis=1))),),
        len(points),
        config.chunk,
    )
    return max([0.0] + [r[0] for r in results])
