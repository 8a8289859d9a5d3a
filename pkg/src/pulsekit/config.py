"""Experiment configuration: parsing, validation, merging.

A config document is a YAML-compatible nested key/value file with three
mandatory sections (data, model, train). Parsing is strict: unknown keys are
rejected rather than ignored. Validation returns *all* violations, not just
the first, so a config can be fixed in one pass.

Defaults: normalization=zscore, split=(0.8, 0.1, 0.1), seed=0, batch_size=32,
epochs=0, channels=1, sampling_rate_hz=100, window_length=1000,
experiment_name="experiment". The missingness seed inherits data.seed when
absent.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from . import dataset as dataset_mod
from . import imputers as imputers_mod
from . import missingness as missingness_mod
from .errors import (
    ConfigSyntaxError,
    InvalidValueError,
    MissingSectionError,
    UnknownFieldError,
    UnknownMissingnessError,
    UnknownModelError,
)
from .missingness import MissingnessSpec

IDENTIFIER_RE = re.compile(r"^[A-Za-z0-9_\-]+$")
FORMATS = ("csv", "raw-f32", "jsonl", "synthetic")
NORMALIZATIONS = ("none", "zscore")
SECTIONS = ("data", "model", "train")
MAX_SEED = 2**64 - 1

DEFAULT_SPLIT = (0.8, 0.1, 0.1)
DEFAULT_BATCH_SIZE = 32


@dataclass(frozen=True)
class Violation:
    """One validation finding; ``kind`` is the error family name."""

    kind: str  # MissingSection | UnknownField | InvalidValue | UnknownModel | UnknownMissingness
    path: str
    reason: str
    value: object = None

    def __str__(self) -> str:
        return f"[{self.kind}] {self.path}: {self.reason}"


@dataclass(frozen=True)
class DataConfig:
    dataset_name: str
    format: str = "synthetic"
    path: str | None = None
    channels: int = 1
    sampling_rate_hz: float = 100.0
    window_length: int = 1000
    normalization: str = "zscore"
    split: tuple[float, float, float] = DEFAULT_SPLIT
    missingness: MissingnessSpec = MissingnessSpec(type="extended", percent=0.3)
    seed: int = 0
    synthetic: dict | None = None


@dataclass(frozen=True)
class ModelConfig:
    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TrainConfig:
    enabled: bool = False
    batch_size: int = DEFAULT_BATCH_SIZE
    epochs: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_name: str
    data: DataConfig
    model: ModelConfig
    train: TrainConfig


@dataclass(frozen=True)
class CliOverrides:
    """Subset of fields a CLI invocation may override."""

    config_path: str | None = None
    dataset_name: str | None = None
    train_flag: bool | None = None

    @property
    def empty(self) -> bool:
        return self.dataset_name is None and self.train_flag is None


# ---------------------------------------------------------------------------
# violation collection
# ---------------------------------------------------------------------------

def _invalid(path: str, reason: str, value=None) -> Violation:
    return Violation("InvalidValue", path, reason, value)


class _Collector:
    def __init__(self):
        self.violations: list[Violation] = []

    def add(self, violation: Violation) -> None:
        self.violations.append(violation)

    def check_keys(self, mapping: dict, known: tuple[str, ...], prefix: str) -> None:
        for key in mapping:
            if key not in known:
                self.add(Violation("UnknownField", f"{prefix}{key}", "unrecognized key", key))

    def expect(self, mapping: dict, key: str, path: str, kind: type | tuple, label: str):
        """Type-checked fetch; returns None (and records) on mismatch."""
        if key not in mapping:
            return None
        value = mapping[key]
        if kind in (int, float) and isinstance(value, bool):
            self.add(_invalid(path, f"must be {label}", value))
            return None
        if kind is float and isinstance(value, int):
            return float(value)
        if not isinstance(value, kind):
            self.add(_invalid(path, f"must be {label}", value))
            return None
        return value


def _collect_missingness(c: _Collector, raw: dict, window_length: int | None) -> None:
    known = ("type", "percent", "max_gap", "pattern_path", "per_channel", "seed")
    c.check_keys(raw, known, "data.missingness.")
    mtype = c.expect(raw, "type", "data.missingness.type", str, "a string")
    if "type" not in raw:
        c.add(_invalid("data.missingness.type", "is required"))
    elif mtype is not None and mtype not in missingness_mod.available_mechanisms():
        c.add(
            Violation(
                "UnknownMissingness",
                "data.missingness.type",
                f"{mtype!r} is not a registered mechanism",
                mtype,
            )
        )
        mtype = None
    percent = c.expect(raw, "percent", "data.missingness.percent", float, "a number")
    if percent is not None:
        if not (0.0 <= percent < 1.0):
            c.add(_invalid("data.missingness.percent", "must lie in [0,1)", percent))
        else:
            if mtype in ("extended", "transient") and percent == 0.0:
                c.add(
                    _invalid(
                        "data.missingness.percent",
                        f"must be positive for {mtype} missingness",
                        percent,
                    )
                )
            if (
                percent > 0.0
                and window_length is not None
                and percent * window_length < 1.0
            ):
                c.add(
                    _invalid(
                        "data.missingness.percent",
                        "percent * window_length must be >= 1",
                        percent,
                    )
                )
    elif mtype in ("extended", "transient") and "percent" not in raw:
        c.add(_invalid("data.missingness.percent", f"is required for {mtype} missingness"))
    max_gap = c.expect(raw, "max_gap", "data.missingness.max_gap", int, "an integer")
    if max_gap is not None and max_gap < 1:
        c.add(_invalid("data.missingness.max_gap", "must be >= 1", max_gap))
    pattern_path = c.expect(raw, "pattern_path", "data.missingness.pattern_path", str, "a string")
    if mtype == "pattern_file" and not pattern_path:
        c.add(_invalid("data.missingness.pattern_path", "is required for pattern_file"))
    if pattern_path and mtype is not None and mtype != "pattern_file":
        c.add(
            _invalid("data.missingness.pattern_path", "only valid for type=pattern_file")
        )
    c.expect(raw, "per_channel", "data.missingness.per_channel", bool, "a boolean")
    seed = c.expect(raw, "seed", "data.missingness.seed", int, "an integer")
    if seed is not None and not (0 <= seed <= MAX_SEED):
        c.add(_invalid("data.missingness.seed", "must be an unsigned 64-bit integer", seed))


_SYNTH_FIELDS = {
    "n_samples": (int, "an integer", lambda v: v >= 1, "must be >= 1"),
    "pulse_rate_hz": (float, "a number", lambda v: v > 0, "must be positive"),
    "rate_jitter": (float, "a number", lambda v: 0 <= v < 0.5, "must lie in [0, 0.5)"),
    "pulse_width_s": (float, "a number", lambda v: v > 0, "must be positive"),
    "baseline_freq_hz": (float, "a number", lambda v: v >= 0, "must be >= 0"),
    "noise_std": (float, "a number", lambda v: v >= 0, "must be >= 0"),
}


def _collect_data(c: _Collector, raw: dict, model_name: str | None) -> None:
    known = (
        "dataset_name",
        "path",
        "format",
        "channels",
        "sampling_rate_hz",
        "window_length",
        "normalization",
        "split",
        "missingness",
        "seed",
        "synthetic",
    )
    c.check_keys(raw, known, "data.")
    name = c.expect(raw, "dataset_name", "data.dataset_name", str, "a string")
    if "dataset_name" not in raw:
        c.add(_invalid("data.dataset_name", "is required"))
    elif name is not None and not IDENTIFIER_RE.match(name):
        c.add(_invalid("data.dataset_name", "must match [A-Za-z0-9_-]+", name))

    fmt = c.expect(raw, "format", "data.format", str, "a string")
    if fmt is not None and fmt not in FORMATS:
        c.add(_invalid("data.format", f"must be one of {list(FORMATS)}", fmt))
        fmt = None
    if fmt is None and "format" not in raw:
        fmt = "synthetic"
    path = c.expect(raw, "path", "data.path", str, "a string")
    if fmt == "synthetic" and path:
        c.add(_invalid("data.path", "must be absent for format=synthetic", path))
    if fmt is not None and fmt != "synthetic" and not path:
        c.add(_invalid("data.path", f"is required for format={fmt}"))

    channels = c.expect(raw, "channels", "data.channels", int, "an integer")
    if channels is not None and channels < 1:
        c.add(_invalid("data.channels", "must be positive", channels))
    rate = c.expect(raw, "sampling_rate_hz", "data.sampling_rate_hz", float, "a number")
    if rate is not None and rate <= 0:
        c.add(_invalid("data.sampling_rate_hz", "must be positive", rate))
    window_length = c.expect(raw, "window_length", "data.window_length", int, "an integer")
    if window_length is not None and window_length < 4:
        c.add(_invalid("data.window_length", "must be >= 4", window_length))
    effective_window = window_length if window_length is not None else (
        DataConfig.window_length if "window_length" not in raw else None
    )
    if model_name == "fft" and effective_window is not None and effective_window < imputers_mod.FFT_MIN_WINDOW:
        c.add(
            _invalid(
                "data.window_length",
                f"fft imputer requires window_length >= {imputers_mod.FFT_MIN_WINDOW}",
                effective_window,
            )
        )

    norm = c.expect(raw, "normalization", "data.normalization", str, "a string")
    if norm is not None and norm not in NORMALIZATIONS:
        c.add(_invalid("data.normalization", f"must be one of {list(NORMALIZATIONS)}", norm))

    if "split" in raw:
        split = raw["split"]
        if (
            not isinstance(split, (list, tuple))
            or len(split) != 3
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in split)
        ):
            c.add(_invalid("data.split", "must be three fractions", split))
        else:
            if any(not (0.0 <= float(x) <= 1.0) for x in split):
                c.add(_invalid("data.split", "fractions must lie in [0,1]", split))
            elif abs(sum(float(x) for x in split) - 1.0) > 1e-9:
                c.add(_invalid("data.split", "fractions must sum to 1", split))

    if "missingness" not in raw:
        c.add(_invalid("data.missingness", "is required"))
    elif not isinstance(raw["missingness"], dict):
        c.add(_invalid("data.missingness", "must be a mapping", raw["missingness"]))
    else:
        _collect_missingness(c, raw["missingness"], effective_window)

    seed = c.expect(raw, "seed", "data.seed", int, "an integer")
    if seed is not None and not (0 <= seed <= MAX_SEED):
        c.add(_invalid("data.seed", "must be an unsigned 64-bit integer", seed))

    if "synthetic" in raw:
        synth = raw["synthetic"]
        if not isinstance(synth, dict):
            c.add(_invalid("data.synthetic", "must be a mapping", synth))
        else:
            c.check_keys(synth, tuple(_SYNTH_FIELDS), "data.synthetic.")
            values = {}
            for key, (kind, label, ok, why) in _SYNTH_FIELDS.items():
                v = c.expect(synth, key, f"data.synthetic.{key}", kind, label)
                if v is not None:
                    if not ok(v):
                        c.add(_invalid(f"data.synthetic.{key}", why, v))
                    else:
                        values[key] = v
            if fmt == "synthetic":
                pulse_rate = values.get("pulse_rate_hz", dataset_mod.SyntheticParams.pulse_rate_hz)
                width_s = values.get("pulse_width_s", dataset_mod.SyntheticParams.pulse_width_s)
                if 1.0 / pulse_rate < 4.0 * width_s:
                    c.add(
                        _invalid(
                            "data.synthetic",
                            "pulse period must be >= 4x pulse width",
                        )
                    )


def _collect_model(c: _Collector, raw: dict) -> str | None:
    c.check_keys(raw, ("name", "params"), "model.")
    name = c.expect(raw, "name", "model.name", str, "a string")
    if "name" not in raw:
        c.add(_invalid("model.name", "is required"))
        return None
    if name is None:
        return None
    if name not in imputers_mod.available_imputers():
        c.add(
            Violation("UnknownModel", "model.name", f"{name!r} is not a registered imputer", name)
        )
        return None
    params = raw.get("params", {})
    if not isinstance(params, dict):
        c.add(_invalid("model.params", "must be a mapping", params))
        return name
    imputer_cls = imputers_mod.registry_lookup(name)
    for key, reason in imputers_mod.check_params(imputer_cls, params):
        if reason == "unknown parameter":
            c.add(Violation("UnknownField", f"model.params.{key}", reason, key))
        else:
            c.add(_invalid(f"model.params.{key}", reason, params.get(key)))
    return name


def _collect_train(c: _Collector, raw: dict) -> None:
    c.check_keys(raw, ("enabled", "batch_size", "epochs"), "train.")
    c.expect(raw, "enabled", "train.enabled", bool, "a boolean")
    batch = c.expect(raw, "batch_size", "train.batch_size", int, "an integer")
    if batch is not None and batch < 1:
        c.add(_invalid("train.batch_size", "must be >= 1", batch))
    epochs = c.expect(raw, "epochs", "train.epochs", int, "an integer")
    if epochs is not None and epochs < 0:
        c.add(_invalid("train.epochs", "must be >= 0", epochs))


def _collect(raw: dict) -> list[Violation]:
    c = _Collector()
    c.check_keys(raw, ("experiment_name",) + SECTIONS, "")
    name = c.expect(raw, "experiment_name", "experiment_name", str, "a string")
    if name is not None and not IDENTIFIER_RE.match(name):
        c.add(_invalid("experiment_name", "must be non-empty and match [A-Za-z0-9_-]+", name))

    for section in SECTIONS:
        if section not in raw:
            c.add(Violation("MissingSection", section, "section is required", section))
        elif not isinstance(raw[section], dict):
            c.add(_invalid(section, "must be a mapping", raw[section]))

    model_name = None
    if isinstance(raw.get("model"), dict):
        model_name = _collect_model(c, raw["model"])
    if isinstance(raw.get("data"), dict):
        _collect_data(c, raw["data"], model_name)
    if isinstance(raw.get("train"), dict):
        _collect_train(c, raw["train"])
    return c.violations


# ---------------------------------------------------------------------------
# parsing / building
# ---------------------------------------------------------------------------

def _load_yaml(text: str) -> dict:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigSyntaxError(f"malformed config document: {e}") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigSyntaxError("config document must be a mapping")
    return raw


def validate_document(text: str) -> list[Violation]:
    """All violations in a config document (empty list means runnable)."""
    return _collect(_load_yaml(text))


_EXCEPTION_FOR_KIND = {
    "MissingSection": lambda v: MissingSectionError(str(v.value)),
    "UnknownField": lambda v: UnknownFieldError(v.path),
    "InvalidValue": lambda v: InvalidValueError(v.path, v.reason),
    "UnknownModel": lambda v: UnknownModelError(str(v.value)),
    "UnknownMissingness": lambda v: UnknownMissingnessError(str(v.value)),
}


def _raise_first(violations: list[Violation]) -> None:
    if violations:
        raise _EXCEPTION_FOR_KIND[violations[0].kind](violations[0])


def _build(raw: dict) -> ExperimentConfig:
    d = raw["data"]
    m = raw["model"]
    t = raw["train"]
    data_seed = int(d.get("seed", 0))
    miss = d["missingness"]
    spec = MissingnessSpec(
        type=str(miss["type"]),
        percent=float(miss.get("percent", 0.0)),
        max_gap=int(miss.get("max_gap", missingness_mod.DEFAULT_MAX_GAP)),
        pattern_path=miss.get("pattern_path"),
        per_channel=bool(miss.get("per_channel", False)),
        seed=int(miss.get("seed", data_seed)),
    )
    data = DataConfig(
        dataset_name=str(d["dataset_name"]),
        format=str(d.get("format", "synthetic")),
        path=d.get("path"),
        channels=int(d.get("channels", DataConfig.channels)),
        sampling_rate_hz=float(d.get("sampling_rate_hz", DataConfig.sampling_rate_hz)),
        window_length=int(d.get("window_length", DataConfig.window_length)),
        normalization=str(d.get("normalization", DataConfig.normalization)),
        split=tuple(float(x) for x in d.get("split", DEFAULT_SPLIT)),
        missingness=spec,
        seed=data_seed,
        synthetic=dict(d["synthetic"]) if d.get("synthetic") else None,
    )
    model = ModelConfig(name=str(m["name"]), params=dict(m.get("params", {})))
    train = TrainConfig(
        enabled=bool(t.get("enabled", False)),
        batch_size=int(t.get("batch_size", DEFAULT_BATCH_SIZE)),
        epochs=int(t.get("epochs", 0)),
    )
    return ExperimentConfig(
        experiment_name=str(raw.get("experiment_name", "experiment")),
        data=data,
        model=model,
        train=train,
    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse a config document, apply defaults, and raise on any violation."""
    raw = _load_yaml(text)
    _raise_first(_collect(raw))
    return _build(raw)


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def config_to_dict(config: ExperimentConfig) -> dict:
    """Plain-dict form (Nones omitted); input to serialization and digests."""
    miss = {
        "type": config.data.missingness.type,
        "percent": config.data.missingness.percent,
        "max_gap": config.data.missingness.max_gap,
        "per_channel": config.data.missingness.per_channel,
        "seed": config.data.missingness.seed,
    }
    if config.data.missingness.pattern_path is not None:
        miss["pattern_path"] = config.data.missingness.pattern_path
    data = {
        "dataset_name": config.data.dataset_name,
        "format": config.data.format,
        "channels": config.data.channels,
        "sampling_rate_hz": config.data.sampling_rate_hz,
        "window_length": config.data.window_length,
        "normalization": config.data.normalization,
        "split": list(config.data.split),
        "missingness": miss,
        "seed": config.data.seed,
    }
    if config.data.path is not None:
        data["path"] = config.data.path
    if config.data.synthetic is not None:
        data["synthetic"] = dict(config.data.synthetic)
    return {
        "experiment_name": config.experiment_name,
        "data": data,
        "model": {"name": config.model.name, "params": dict(config.model.params)},
        "train": {
            "enabled": config.train.enabled,
            "batch_size": config.train.batch_size,
            "epochs": config.train.epochs,
        },
    }


def serialize_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=True, default_flow_style=False)


def validate(config: ExperimentConfig) -> list[Violation]:
    """Re-check a parsed config; returns all violations (empty = runnable)."""
    return _collect(config_to_dict(config))


def config_digest(config: ExperimentConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def merge_overrides(
    config: ExperimentConfig,
    overrides: CliOverrides,
    data_root: str | Path | None = None,
) -> ExperimentConfig:
    """Apply CLI overrides; identity for empty overrides.

    A dataset override replaces data.dataset_name and re-resolves the format:
    synthetic names keep the synthetic generator, other names are looked up as
    custom dataset directories under the data root. The merged result is
    re-validated.
    """
    if overrides.empty:
        return config
    merged = config
    if overrides.dataset_name is not None:
        name = overrides.dataset_name
        if dataset_mod.is_synthetic_name(name):
            data = replace(merged.data, dataset_name=name, format="synthetic", path=None)
        else:
            path, fmt = dataset_mod.resolve_custom_dataset(name, data_root)
            data = replace(merged.data, dataset_name=name, format=fmt, path=str(path))
        merged = replace(merged, data=data)
    if overrides.train_flag is not None:
        merged = replace(merged, train=replace(merged.train, enabled=overrides.train_flag))
    _raise_first(validate(merged))
    return merged
