"""Run configuration: defaults, flat ``key = value`` files, bounds checks."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .dataset import WEIGHTINGS
from .features import FeatureParams
from .forest import ForestConfig
from .ingest import ChannelKind

FILTER_PASSES = ("zero-phase", "single")

# config-file key -> RunConfig attribute
KEYS = {
    "manifest": "manifest",
    "out": "out",
    "record.sample_rate_hz": "sample_rate_hz",
    "filter.order": "filter_order",
    "filter.cutoff.ecg": "cutoff_ecg",
    "filter.cutoff.resp": "cutoff_resp",
    "filter.cutoff.gsr": "cutoff_gsr",
    "filter.pass": "filter_pass",
    "window.length_s": "window_length_s",
    "window.hop_s": "window_hop_s",
    "gsr.min_prominence": "gsr_min_prominence",
    "gsr.min_separation_s": "gsr_min_separation_s",
    "hrv.tachogram_rate_hz": "tachogram_rate_hz",
    "expansion.weights": "weights",
    "n_values": "n_values",
    "forest.n_trees": "n_trees",
    "forest.max_depth": "max_depth",
    "forest.min_samples_split": "min_samples_split",
    "forest.features_per_split": "features_per_split",
    "seed": "seed",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    manifest: str | None = None
    out: str | None = None
    sample_rate_hz: float | None = None
    filter_order: int = 5
    cutoff_ecg: float = 40.0
    cutoff_resp: float = 10.0
    cutoff_gsr: float = 1.0
    filter_pass: str = "zero-phase"
    window_length_s: float = 100.0
    window_hop_s: float = 50.0
    gsr_min_prominence: float = 0.01
    gsr_min_separation_s: float = 1.0
    tachogram_rate_hz: float = 4.0
    weights: str = "linear"
    n_values: tuple[int, ...] = (2, 3, 4, 5)
    n_trees: int = 100
    max_depth: int = 30
    min_samples_split: int = 2
    features_per_split: int | None = None
    seed: int = 0
    jobs: int = field(default=1, compare=False)
    skip_bad: bool = field(default=False, compare=False)

    def validate(self) -> "RunConfig":
        if self.filter_order < 1:
            raise ConfigError("filter.order must be >= 1")
        for name in ("cutoff_ecg", "cutoff_resp", "cutoff_gsr", "window_length_s", "window_hop_s",
                     "gsr_min_prominence", "gsr_min_separation_s", "tachogram_rate_hz"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.sample_rate_hz is not None and not self.sample_rate_hz > 0:
            raise ConfigError("record.sample_rate_hz must be positive")
        if self.filter_pass not in FILTER_PASSES:
            raise ConfigError(f"filter.pass must be one of {FILTER_PASSES}")
        if self.weights not in WEIGHTINGS:
            raise ConfigError(f"expansion.weights must be one of {WEIGHTINGS}")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError("n_values must be positive integers")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            self.forest_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def cutoffs(self) -> dict[ChannelKind, float]:
        return {
            ChannelKind.ECG: self.cutoff_ecg,
            ChannelKind.RESPIRATION: self.cutoff_resp,
            ChannelKind.HAND_GSR: self.cutoff_gsr,
            ChannelKind.FOOT_GSR: self.cutoff_gsr,
        }

    def forest_config(self) -> ForestConfig:
        return ForestConfig(self.n_trees, self.max_depth, self.min_samples_split, self.features_per_split, self.seed)

    def feature_params(self) -> FeatureParams:
        return FeatureParams(self.gsr_min_prominence, self.gsr_min_separation_s, self.tachogram_rate_hz)

    def digest_fields(self, *names: str) -> dict:
        d = asdict(self)
        return {k: d[k] for k in names} if names else {k: v for k, v in d.items() if k not in ("jobs", "skip_bad", "manifest", "out")}


def _coerce(attr: str, raw: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    t = str(types[attr])
    raw = raw.strip()
    if attr == "n_values":
        return tuple(int(x) for x in raw.replace(",", " ").split())
    if raw.lower() in ("none", "") and "None" in t:
        return None
    if t.startswith("int"):
        return int(raw)
    if t.startswith("float"):
        return float(raw)
    if t == "bool":
        return raw.lower() in ("1", "true", "yes")
    return raw


def parse_config(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (p.strip() for p in line.split(sep, 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[KEYS[key]] = _coerce(KEYS[key], raw)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value {raw!r} for {key}") from None
    return values


def load_config(path: str | os.PathLike | None = None, **overrides) -> RunConfig:
    """Defaults, then the config file, then non-None ``overrides``."""
    cfg = RunConfig()
    if path is not None:
        p = Path(path)
        file_values = parse_config(p.read_text(), str(p))
        if "manifest" in file_values:
            file_values["manifest"] = str((p.parent / file_values["manifest"]).resolve())
        cfg = replace(cfg, **file_values)
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


def format_config(cfg: RunConfig) -> str:
    d = asdict(cfg)
    lines = []
    for key, attr in KEYS.items():
        v = d[attr]
        if v is None:
            continue
        if attr == "n_values":
            v = ",".join(str(n) for n in v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"
