"""Run configuration: a YAML document with a `schema-version` key.

Example::

    schema-version: 1
    model: fermi-trap          # fermi-trap | fermi-impurity | lmg
    preset: null               # fig1a, fig1b, fig2, fig3a, fig3b, supp-a, supp-b, supp-c
    couplings: [1.5]           # eta, kappa or lambda depending on the model
    n_values: [10, 20, 40]
    time: {t_max: null, n_points: 512}
    thresholds: [0.01]
    params: {}                 # preset-specific extras
    output_dir: results
    jobs: 1
    tolerances: {}             # overrides of Tolerances fields
"""
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import yaml

from ..config import DEFAULT_TOLERANCES

SCHEMA_VERSION = 1
MODELS = ("fermi-trap", "fermi-impurity", "lmg")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    model: str = "fermi-trap"
    couplings: tuple = (1.5,)
    n_values: tuple = (10,)
    t_max: Optional[float] = None
    n_points: int = 512
    thresholds: tuple = (0.01,)
    params: dict = field(default_factory=dict)
    output_dir: str = "results"
    jobs: int = 1
    tolerances: dict = field(default_factory=dict)
    preset: Optional[str] = None

    def __post_init__(self):
        for name in ("couplings", "n_values", "thresholds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.validate()

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        for name in ("couplings", "n_values", "thresholds"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be non-empty")
        if any(int(n) != n or n < 1 for n in self.n_values):
            raise ConfigError("n_values must be positive integers")
        if any(not 0 < th <= 1 for th in self.thresholds):
            raise ConfigError("thresholds must lie in (0, 1]")
        if self.n_points < 2:
            raise ConfigError("time grid needs at least two points")
        if self.t_max is not None and not self.t_max > 0:
            raise ConfigError("t_max must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            DEFAULT_TOLERANCES.updated(**self.tolerances)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def tol(self):
        return DEFAULT_TOLERANCES.updated(**self.tolerances)

    def to_dict(self):
        d = asdict(self)
        time = {"t_max": d.pop("t_max"), "n_points": d.pop("n_points")}
        out = {"schema-version": SCHEMA_VERSION}
        out.update(d)
        out["time"] = time
        for name in ("couplings", "n_values", "thresholds"):
            out[name] = list(out[name])
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data or {})
        version = data.pop("schema-version", None)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema-version {version!r} (expected {SCHEMA_VERSION})")
        time = data.pop("time", {}) or {}
        if not isinstance(time, dict) or set(time) - {"t_max", "n_points"}:
            raise ConfigError("time must be a mapping with keys t_max, n_points")
        data.update(time)
        preset = data.get("preset")
        if preset is not None:
            data = _merge_preset(preset, data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def for_preset(cls, name, **overrides):
        """Preset defaults with keyword overrides (params are merged key by key)."""
        return cls(**_merge_preset(name, dict(overrides, preset=name)))

    def to_yaml(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text, preset=None):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        if preset is not None:
            data["preset"] = preset
        return cls.from_dict(data)

    @classmethod
    def load(cls, path, preset=None):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_yaml(text, preset)

    def with_overrides(self, **kw):
        try:
            return replace(self, **{k: v for k, v in kw.items() if v is not None})
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def digest(self):
        """Hash of everything that affects results (not where they go or how fast)."""
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("jobs")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


def _merge_preset(name, data):
    from .presets import PRESETS, TASKS

    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    merged = dict(TASKS[name].defaults)
    params = dict(merged.get("params", {}))
    params.update(data.get("params") or {})
    merged.update(data)
    merged["params"] = params
    merged["model"] = TASKS[name].defaults["model"]  # a preset fixes its model
    return merged
