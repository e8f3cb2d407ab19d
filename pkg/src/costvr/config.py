"""Config loading and hashing for experiments and CLI commands."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import InvalidParameterError


def load_config(path) -> dict:
    """Read a YAML or JSON mapping. ``None`` gives an empty config."""
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config {p}: {exc}") from exc
    try:
        data = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise InvalidParameterError(f"cannot parse config {p}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidParameterError("config must be a mapping")
    return data


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "item"):
        return _canonical(obj.item())
    return obj


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, no whitespace)."""
    blob = json.dumps(_canonical(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class ExperimentConfig:
    """One reproducible run: experiment id, parameters, trials and seed."""

    experiment: str
    params: dict = field(default_factory=dict)
    trials: int | None = None
    seed: int = 0
    out_dir: str = "out"
    sweep: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials is not None and self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameterError("seed must fit in an unsigned 64-bit integer")
        for name, values in self.sweep.items():
            vals = list(values)
            if not vals or not all(math.isfinite(float(v)) for v in vals):
                raise InvalidParameterError(f"sweep axis {name!r} needs finite values")

    def as_dict(self) -> dict:
        return {"experiment": self.experiment, "params": self.params, "trials": self.trials,
                "seed": int(self.seed), "sweep": self.sweep}

    @property
    def hash(self) -> str:
        return config_hash(self.as_dict())
