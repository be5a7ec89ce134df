"""Runtime settings: numeric tolerances and worker count."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from typing import Optional

LOGGER = logging.getLogger(__name__)

THREADS_ENV = "GRAFTLAB_THREADS"
DEFAULT_MAX_WORKERS = 4
SAMPLE_CHUNK = 256


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used by geometric predicates and algebraic identities."""

    geometric: float = 1e-9
    algebraic: float = 1e-12
    parabolic: float = 1e-10
    adjacency: float = 1e-8
    fd_step: float = 1e-5


_ACTIVE = Tolerances()


def get_tolerances() -> Tolerances:
    return _ACTIVE


def configure(**overrides: float) -> Tolerances:
    """Replace selected tolerances globally and return the new record."""
    global _ACTIVE
    for name, value in overrides.items():
        if value is None or float(value) <= 0:
            raise ValueError(f"tolerance {name} must be positive")
    _ACTIVE = replace(_ACTIVE, **{k: float(v) for k, v in overrides.items()})
    LOGGER.debug("Tolerances set to %s", _ACTIVE)
    return _ACTIVE


def reset() -> Tolerances:
    global _ACTIVE
    _ACTIVE = Tolerances()
    return _ACTIVE


def worker_count(default: Optional[int] = None) -> int:
    """Return the worker cap from GRAFTLAB_THREADS, falling back to min(4, cpu count)."""
    fallback = default or min(DEFAULT_MAX_WORKERS, os.cpu_count() or 1)
    raw = os.getenv(THREADS_ENV, "").strip()
    if not raw:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        LOGGER.warning("Ignoring non-integer %s=%r", THREADS_ENV, raw)
        return fallback
    if value < 1:
        LOGGER.warning("Ignoring non-positive %s=%r", THREADS_ENV, raw)
        return fallback
    return value
