"""Command-line front end: `python -m graftlab <subcommand> --config <path> --out <path>`."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from graftlab import settings
from graftlab.cylinder_geometry import eta_bench, make_cylinder, xi_bench
from graftlab.distortion import SamplerConfig
from graftlab.errors import (
    ConfigParseError,
    ExperimentFailedError,
    GraftlabError,
    GraftlabValidationError,
    UnknownSubcommandError,
)
from graftlab.formatting import emit_csv, emit_svg, svg_path, to_frame
from graftlab.grafting import WeightedLoop, graft, thurston_metric_summary, two_pi_graft
from graftlab.models import SAMPLING_DISCLAIMER, ExperimentConfig
from graftlab.moebius_core import CircleOnSphere, HyperbolicPlaneH3, plane_distance
from graftlab.presets import REGISTRY, resolve_surface, resolve_track, resolve_weights
from graftlab.qc_assembly import run_experiment
from graftlab.traintrack import IntegerWeights, WeightVector, approximate_ray, validate_weights

LOGGER = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
SUBCOMMANDS = ("approx", "graft", "cylinder", "xi-bench", "eta-bench", "qc-experiment", "validate")
APPROX_COLUMNS = ["t", "branch_id", "w_i", "m_i", "error_i", "D_achieved"]
GRAFT_COLUMNS = ["loop_id", "length", "weight", "modulus", "area"]
CYLINDER_COLUMNS = ["pair", "core_length", "plane_distance", "modulus"]
XI_COLUMNS = ["delta", "V", "A_est", "B_est", "K_qc_est"]
ETA_COLUMNS = ["delta", "w", "displacement", "A_est", "B_est", "K_qc_est", "seam_residual"]
QC_COLUMNS = ["t", "D_achieved", "A_est", "B_est", "K_qc_est", "teich_bound", "seam_max"]
DEFAULT_XI_DELTAS = [0.1, 0.03, 0.01, 0.003]
DEFAULT_ETA_DELTAS = [0.1, 0.03, 0.01]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise GraftlabValidationError(message)


@dataclass
class Output:
    """Rows for one CSV plus what the summary and chart need."""

    rows: List[Dict[str, Any]]
    columns: List[str]
    summary: List[str] = field(default_factory=list)
    chart: Optional[Dict[str, Any]] = None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graftlab", description="Grafting, traintrack and quasiconformal experiments")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("target", nargs="?", help="for validate: 'presets' or a config path")
    parser.add_argument("--config", type=Path)
    parser.add_argument("--out", type=Path)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--svg", action="store_true")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def load_config(path: Optional[Path], seed: Optional[int] = None, samples: Optional[int] = None) -> ExperimentConfig:
    if path is None:
        raise ConfigParseError("a --config file is required", field_path="$")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"malformed JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    if isinstance(payload, dict):
        if seed is not None:
            payload["seed"] = seed
        if samples is not None:
            payload["samples"] = samples
    return ExperimentConfig.from_dict(payload)


def _in_field(name: str, build: Callable[[], Any]) -> Any:
    """Attach the config field name to validation failures."""
    try:
        return build()
    except ConfigParseError:
        raise
    except (GraftlabValidationError, KeyError, TypeError, ValueError) as exc:
        raise ConfigParseError(str(exc), field_path=name) from exc


def _track_and_weights(config: ExperimentConfig, key: str) -> tuple:
    track = _in_field("track", lambda: resolve_track(config.track))
    raw = getattr(config, key)
    if raw is None:
        raise ConfigParseError(f"{key} weights are required", field_path=key)
    weights = _in_field(key, lambda: resolve_weights(track, raw, key))
    return track, weights


def run_approx(config: ExperimentConfig) -> Output:
    track, weights = _track_and_weights(config, "M" if config.M is not None else "L")
    rows = []
    for t in config.t_grid:
        result = approximate_ray(track, weights, t)
        for branch, w, m, err in zip(track.branches, weights.values, result.m.values, result.errors):
            rows.append(
                {"t": t, "branch_id": branch, "w_i": float(w), "m_i": int(m), "error_i": float(err), "D_achieved": result.D_achieved}
            )
        LOGGER.info("approx t=%g D_achieved=%.6g", t, result.D_achieved)
    return Output(rows, APPROX_COLUMNS, [f"{len(config.t_grid)} scales on {track.size} branches"])


def run_graft(config: ExperimentConfig) -> Output:
    surface = _in_field("surface", lambda: resolve_surface(config.surface))
    track, lamination = _track_and_weights(config, "L")
    loops = _in_field("loops", lambda: [WeightedLoop.from_dict(item) for item in config.loops])
    coords = graft(surface, track, lamination, loops)
    if config.N is not None:
        N = _in_field("N", lambda: IntegerWeights.from_mapping(track, config.N))
        coords = two_pi_graft(coords, N)
    summary = thurston_metric_summary(coords)
    rows = [
        {"loop_id": c.loop_id, "length": c.length, "weight": c.weight, "modulus": c.modulus, "area": c.area}
        for c in summary.cylinders
    ]
    rows.append({"loop_id": "total", "length": None, "weight": None, "modulus": None, "area": summary.total_area})
    return Output(rows, GRAFT_COLUMNS, summary.summary_lines())


def run_cylinder(config: ExperimentConfig) -> Output:
    rows = []
    for i, item in enumerate(config.circles):
        path = f"circles[{i}]"
        c1, c2 = _in_field(path, lambda: tuple(CircleOnSphere.from_json(raw) for raw in item))
        cylinder = _in_field(path, lambda: make_cylinder(c1, c2))
        distance = plane_distance(HyperbolicPlaneH3(c1), HyperbolicPlaneH3(c2))
        rows.append({"pair": i, "core_length": cylinder.core_length, "plane_distance": distance, "modulus": cylinder.modulus})
    return Output(rows, CYLINDER_COLUMNS, [f"{len(rows)} cylinders"])


def _sampler(config: ExperimentConfig) -> SamplerConfig:
    return SamplerConfig(samples=config.samples, seed=config.seed)


def run_xi_bench(config: ExperimentConfig) -> Output:
    deltas = config.deltas or DEFAULT_XI_DELTAS
    K = config.width or 2.0 * math.pi
    rows = xi_bench(deltas, K=K, seed=config.seed, config=_sampler(config))
    chart = {"x": "delta", "y": "A_est", "title": "xi bilipschitz constant", "log_x": True}
    return Output(rows, XI_COLUMNS, [SAMPLING_DISCLAIMER, f"K={K:g} seed={config.seed}"], chart)


def run_eta_bench(config: ExperimentConfig) -> Output:
    deltas = config.deltas or DEFAULT_ETA_DELTAS
    width = config.width or 2.0 * math.pi
    rows = eta_bench(deltas, width=width, seed=config.seed, config=_sampler(config))
    chart = {"x": "delta", "y": "A_est", "title": "eta bilipschitz constant", "log_x": True}
    return Output(rows, ETA_COLUMNS, [SAMPLING_DISCLAIMER, f"w={width:g} seed={config.seed}"], chart)


def run_qc_experiment(config: ExperimentConfig) -> Output:
    report = run_experiment(config)
    chart = {"x": "t", "y": "teich_bound", "title": "Teichmüller distance bound", "log_x": True}
    return Output([row.to_record() for row in report.rows], QC_COLUMNS, report.summary_lines(), chart)


def validate_config(config: ExperimentConfig) -> List[str]:
    """Run every module validator the config gives inputs for."""
    lines = []
    if config.track is not None:
        track = _in_field("track", lambda: resolve_track(config.track))
        lines.append(f"track: {track.size} branches, {len(track.switches)} switches")
        for key in ("L", "M"):
            raw = getattr(config, key)
            if raw is None:
                continue
            weights: WeightVector = _in_field(key, lambda: resolve_weights(track, raw, key))
            report = validate_weights(track, weights)
            if not report.ok:
                raise ConfigParseError("; ".join(report.summary_lines()), field_path=key)
            lines.append(f"{key}: ok")
        if config.surface is not None:
            run_graft(config)
            lines.append("surface and loops: ok")
    elif config.surface is not None:
        surface = _in_field("surface", lambda: resolve_surface(config.surface))
        lines.append(f"surface: genus {surface.genus}")
    if config.circles:
        lines.append(run_cylinder(config).summary[0])
    return lines


HANDLERS: Dict[str, Callable[[ExperimentConfig], Output]] = {
    "approx": run_approx,
    "graft": run_graft,
    "cylinder": run_cylinder,
    "xi-bench": run_xi_bench,
    "eta-bench": run_eta_bench,
    "qc-experiment": run_qc_experiment,
}


def _write(output: Output, out: Path, svg: bool) -> None:
    emit_csv(output.rows, output.columns, out, output.summary)
    if svg and output.chart is not None:
        frame = to_frame(output.rows, output.columns)
        emit_svg(frame, svg_path(out), **output.chart)


def _dispatch(args: argparse.Namespace, preset_lines: List[str]) -> int:
    if args.subcommand == "validate":
        if args.target in (None, "presets") and args.config is None:
            lines = preset_lines
        else:
            path = args.config or Path(args.target)
            lines = validate_config(load_config(path, args.seed, args.samples))
        print("\n".join(lines))
        return 0
    config = load_config(args.config, args.seed, args.samples)
    out = args.out or Path(f"{args.subcommand}.csv")
    try:
        output = HANDLERS[args.subcommand](config)
    except ExperimentFailedError as exc:
        partial = Output([row.to_record() for row in exc.rows], QC_COLUMNS, [str(exc)])
        _write(partial, out, False)
        raise
    _write(output, out, args.svg)
    return 0


def run(argv: Sequence[str]) -> int:
    """Parse argv, run one subcommand and map failures to exit codes (1 input, 2 numeric)."""
    argv = list(argv)
    first = argv[0] if argv and not argv[0].startswith("-") else None
    try:
        if first is not None and first not in SUBCOMMANDS:
            raise UnknownSubcommandError(f"unknown subcommand {first!r}; expected one of {', '.join(SUBCOMMANDS)}")
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT, stream=sys.stderr)
        if args.tolerance is not None:
            settings.configure(geometric=args.tolerance)
        preset_lines = REGISTRY.validate_all()
        return _dispatch(args, preset_lines)
    except GraftlabError as exc:
        LOGGER.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        LOGGER.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        settings.reset()


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))
