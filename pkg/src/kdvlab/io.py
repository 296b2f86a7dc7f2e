"""JSON configuration, CSV traces and JSON run reports."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError
from .operator import Scheme
from .solver import CutoffSpec, InitialCondition, SimulationConfig, SimulationTrace

_TOP_KEYS = {
    "length", "n", "dt", "t_end", "mode", "cutoff_epsilon", "scheme",
    "snapshot_stride", "newton_tol", "newton_max_iter", "initial", "seed",
}
_REQUIRED = ("length", "n", "dt", "t_end", "mode", "initial")
_INITIAL_KEYS = {"kind", "amplitude", "path"}


def _number(raw, key, kind=float):
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"config key '{key}' must be a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigurationError(f"config key '{key}' must be an integer, got {value!r}")
        return int(value)
    return float(value)


def config_from_dict(raw: dict, base_dir: Path | None = None) -> SimulationConfig:
    """Validate a parsed config document. Error messages name the bad key."""
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config key '{sorted(unknown)[0]}'")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigurationError(f"missing config key '{key}'")
    initial = raw["initial"]
    if not isinstance(initial, dict):
        raise ConfigurationError("config key 'initial' must be an object")
    unknown = set(initial) - _INITIAL_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config key 'initial.{sorted(unknown)[0]}'")
    if "kind" not in initial:
        raise ConfigurationError("missing config key 'initial.kind'")
    path = initial.get("path")
    if path is not None and base_dir is not None and not Path(path).is_absolute():
        path = str(base_dir / path)
    amplitude = _number(initial, "amplitude") if "amplitude" in initial else 0.0

    scheme = raw.get("scheme", Scheme.DISSIPATIVE_BIASED.value)
    try:
        scheme = Scheme(scheme)
    except ValueError:
        raise ConfigurationError(f"config key 'scheme' has unknown value {scheme!r}") from None
    checks = {
        "length": float, "n": int, "dt": float, "t_end": float, "cutoff_epsilon": float,
        "snapshot_stride": int, "newton_tol": float, "newton_max_iter": int, "seed": int,
    }
    values = {k: _number(raw, k, kind) for k, kind in checks.items() if k in raw}
    eps = values.get("cutoff_epsilon", 0.0)
    if not math.isfinite(eps) or eps < 0:
        raise ConfigurationError(f"config key 'cutoff_epsilon' must be >= 0, got {eps!r}")
    try:
        return SimulationConfig(
            length=values["length"],
            n=values["n"],
            dt=values["dt"],
            t_end=values["t_end"],
            mode=raw["mode"],
            initial=InitialCondition(str(initial["kind"]), amplitude, path),
            cutoff=CutoffSpec(eps),
            scheme=scheme,
            snapshot_stride=values.get("snapshot_stride", 1),
            newton_tol=values.get("newton_tol", 1e-12),
            newton_max_iter=values.get("newton_max_iter", 50),
            seed=values.get("seed", 0),
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"invalid config: {exc}") from None


def load_config(path) -> SimulationConfig:
    path = Path(path)
    text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: not valid JSON ({exc})") from None
    return config_from_dict(raw, base_dir=path.parent)


def write_trace_csv(trace: SimulationTrace, path) -> None:
    """One row per sample, every number at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SimulationTrace.COLUMNS)
        columns = [trace.column(name) for name in SimulationTrace.COLUMNS]
        for row in zip(*columns):
            writer.writerow([format(float(v), ".17g") for v in row])


def read_trace_csv(path) -> SimulationTrace:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SimulationTrace.COLUMNS:
            raise ConfigurationError(f"{path}: unexpected CSV header {header}")
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return SimulationTrace(None, *(data[:, k] for k in range(len(header))))


def to_jsonable(obj):
    """Recursively convert numpy/complex/non-finite values for ``json``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


@dataclass
class RunReport:
    command: str
    config: dict
    payload: dict
    wall_clock_seconds: float = 0.0
    tool_version: str = field(default=__version__)

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "command": self.command,
            "config": self.config,
            "payload": self.payload,
            "wall_clock_seconds": self.wall_clock_seconds,
        }


def write_report_json(report, path) -> None:
    data = report.to_dict() if hasattr(report, "to_dict") else report
    with open(path, "w") as fh:
        json.dump(to_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
