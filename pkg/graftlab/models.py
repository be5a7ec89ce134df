"""Report records shared by the geometry, assembly and output modules."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Optional

from graftlab.errors import ConfigParseError

SAMPLING_DISCLAIMER = (
    "Sampled dilatations estimate the constructed piecewise map only; teich_bound is an "
    "upper-bound witness for the Teichmüller distance up to sampling error."
)
SYNTHESIS_DISCLAIMER = (
    "Rectangles are synthesized from a seeded perturbation model, not from developing maps."
)


@dataclass
class NearnessParams:
    """Closeness thresholds for circular, straight and concentric checks."""

    eps: float
    K: float = 0.0
    delta: float = 0.0
    V: Optional[float] = None
    V_prime: Optional[float] = None
    D: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.K < 0:
            raise ValueError(f"K must be nonnegative, got {self.K}")


@dataclass
class DistortionEstimate:
    """Sampled bilipschitz (A), rough-isometry (B) and dilatation (K) constants."""

    A_est: float = 1.0
    B_est: float = 0.0
    K_qc_est: float = 1.0
    samples: int = 0
    seam_max: float = 0.0
    fold_free: bool = True
    label: str = ""

    @property
    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.A_est, self.B_est, self.K_qc_est))

    @classmethod
    def dominating(cls, pieces: Iterable["DistortionEstimate"], label: str = "global") -> "DistortionEstimate":
        """Maximum of every constant over the pieces; an empty list gives the isometry values."""
        result = cls(label=label)
        for piece in pieces:
            result.A_est = max(result.A_est, piece.A_est)
            result.B_est = max(result.B_est, piece.B_est)
            result.K_qc_est = max(result.K_qc_est, piece.K_qc_est)
            result.seam_max = max(result.seam_max, piece.seam_max)
            result.samples += piece.samples
            result.fold_free = result.fold_free and piece.fold_free
        return result

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def summary_lines(self) -> List[str]:
        name = self.label or "map"
        return [
            f"{name}: A_est={self.A_est:.9g} B_est={self.B_est:.9g} K_qc_est={self.K_qc_est:.9g} "
            f"({self.samples} samples, seam {self.seam_max:.3g})"
        ]


@dataclass
class ExperimentRow:
    t: float
    delta: float
    N: Dict[str, int]
    D_achieved: float
    pieces: List[DistortionEstimate] = field(default_factory=list)
    A_est: float = 1.0
    B_est: float = 0.0
    K_qc_est: float = 1.0
    seam_max: float = 0.0
    error: Optional[str] = None

    @property
    def teich_bound(self) -> float:
        return 0.5 * math.log(self.K_qc_est)

    def to_record(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "D_achieved": self.D_achieved,
            "A_est": self.A_est,
            "B_est": self.B_est,
            "K_qc_est": self.K_qc_est,
            "teich_bound": self.teich_bound,
            "seam_max": self.seam_max,
        }


@dataclass
class ExperimentReport:
    rows: List[ExperimentRow] = field(default_factory=list)
    delta: float = 0.0
    seed: int = 0
    samples: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def teich_bounds(self) -> List[float]:
        return [row.teich_bound for row in self.rows]

    def summary_lines(self) -> List[str]:
        lines = [SAMPLING_DISCLAIMER, SYNTHESIS_DISCLAIMER]
        lines.append(f"delta={self.delta:g} seed={self.seed} samples={self.samples}")
        for row in self.rows:
            if row.error:
                lines.append(f"t={row.t:g}: failed ({row.error})")
                continue
            lines.append(
                f"t={row.t:g}: D_achieved={row.D_achieved:.6g} K_qc_est={row.K_qc_est:.9g} "
                f"teich_bound={row.teich_bound:.6g} seam_max={row.seam_max:.3g}"
            )
        lines.extend(self.notes)
        return lines


def _number(payload: Dict[str, Any], key: str, default: Any = None) -> Any:
    if key not in payload or payload[key] is None:
        return default
    value = payload[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigParseError("expected a number", field_path=key)
    return value


def _number_list(payload: Dict[str, Any], key: str) -> List[float]:
    raw = payload.get(key) or []
    if not isinstance(raw, list):
        raise ConfigParseError("expected a list of numbers", field_path=key)
    values = []
    for i, item in enumerate(raw):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigParseError("expected a number", field_path=f"{key}[{i}]")
        values.append(float(item))
    return values


def _weights(payload: Dict[str, Any], key: str, integral: bool = False) -> Any:
    """A branch → weight object, or a weight preset name."""
    raw = payload.get(key)
    if raw is None:
        return None
    if isinstance(raw, str) and not integral:
        return raw
    if not isinstance(raw, dict):
        raise ConfigParseError("expected an object of branch weights", field_path=key)
    out: Dict[str, Any] = {}
    for name, value in raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigParseError("expected a number", field_path=f"{key}.{name}")
        if integral:
            if float(value) != int(value):
                raise ConfigParseError("expected an integer", field_path=f"{key}.{name}")
            out[str(name)] = int(value)
        else:
            out[str(name)] = float(value)
    return out


@dataclass
class ExperimentConfig:
    """Parsed JSON configuration shared by every subcommand."""

    track: Any = None
    L: Any = None
    M: Any = None
    N: Optional[Dict[str, int]] = None
    widths: Optional[Dict[str, float]] = None
    delta: float = 0.01
    t_grid: List[float] = field(default_factory=list)
    seed: int = 42
    samples: int = 4096
    surface: Any = None
    loops: List[Dict[str, Any]] = field(default_factory=list)
    circles: List[Any] = field(default_factory=list)
    deltas: List[float] = field(default_factory=list)
    width: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta <= 0.5:
            raise ConfigParseError(f"delta must lie in [0, 0.5], got {self.delta}", field_path="delta")
        for i, t in enumerate(self.t_grid):
            if not t > 0:
                raise ConfigParseError(f"t must be positive, got {t}", field_path=f"t_grid[{i}]")
        if self.samples < 256:
            raise ConfigParseError(f"samples must be at least 256, got {self.samples}", field_path="samples")
        if self.seed < 0:
            raise ConfigParseError("seed must be nonnegative", field_path="seed")
        for name, value in (self.widths or {}).items():
            if not value > 0:
                raise ConfigParseError("widths must be positive", field_path=f"widths.{name}")
        if self.width is not None and not self.width > 0:
            raise ConfigParseError("width must be positive", field_path="width")

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(payload, dict):
            raise ConfigParseError("configuration must be a JSON object", field_path="$")
        loops = payload.get("loops") or []
        if not isinstance(loops, list) or not all(isinstance(item, dict) for item in loops):
            raise ConfigParseError("expected a list of loop objects", field_path="loops")
        circles = payload.get("circles") or []
        if not isinstance(circles, list):
            raise ConfigParseError("expected a list of circles", field_path="circles")
        seed = _number(payload, "seed", 42)
        samples = _number(payload, "samples", 4096)
        for key, value in (("seed", seed), ("samples", samples)):
            if float(value) != int(value):
                raise ConfigParseError("expected an integer", field_path=key)
        return cls(
            track=payload.get("track"),
            L=_weights(payload, "L"),
            M=_weights(payload, "M"),
            N=_weights(payload, "N", integral=True),
            widths=_weights(payload, "widths"),
            delta=float(_number(payload, "delta", 0.01)),
            t_grid=_number_list(payload, "t_grid"),
            seed=int(seed),
            samples=int(samples),
            surface=payload.get("surface"),
            loops=[dict(item) for item in loops],
            circles=list(circles),
            deltas=_number_list(payload, "deltas"),
            width=_number(payload, "width"),
        )

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        return {k: v for k, v in out.items() if v is not None and v != []}
