"""Waveform datasets: loading from disk, synthetic generation, preprocessing.

A dataset on disk is a directory holding files in one of three formats:

* ``csv``     -- one or more ``*.csv`` files, columns = channels, optional
  header row with channel names. A missing marker (empty cell or ``nan``,
  case-insensitive) is zeroed in the signal and recorded in a load-time mask
  attached to the sample; signals never carry NaN.
* ``raw-f32`` -- ``*.f32`` files of little-endian float32, channel-major
  blocks per record, plus a ``meta.json`` sidecar with keys ``channels``,
  ``sampling_rate_hz``, ``record_length`` and ``dtype: "f32le"``.
* ``jsonl``   -- ``*.jsonl`` files, one record per line:
  ``{"id": str, "values": [[...], ...]}`` (channels x T). ``null``/NaN cells
  are treated as missing markers.

Files are read in lexicographic filename order and records in file order, so
sample order is deterministic. Continuous recordings are cut into
non-overlapping windows of ``window_length``; the trailing remainder is
dropped.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import (
    DatasetIOError,
    DegenerateChannelError,
    EmptyDatasetError,
    FormatError,
    InvalidValueError,
)
from .seeding import SPLIT_TAG, SYNTH_TAG, tagged_seed

if TYPE_CHECKING:  # pragma: no cover
    from .config import DataConfig

# fixed amplitudes of the synthetic generator (the shape parameters live in
# SyntheticParams; amplitudes are normalized away by z-scoring anyway)
PULSE_AMPLITUDE = 1.0
BASELINE_AMPLITUDE = 0.5


@dataclass(frozen=True)
class Sample:
    """One fixed-length multi-channel window.

    ``values`` is a (channels, window_length) float64 matrix. ``load_mask``
    marks positions that were missing markers in the source file (None when
    the source had none). Treat instances as immutable.
    """

    id: str
    values: np.ndarray
    load_mask: np.ndarray | None = None

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def window_length(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SignalSet:
    """An ordered, immutable collection of equally shaped samples."""

    samples: tuple[Sample, ...]
    sampling_rate_hz: float
    channel_names: tuple[str, ...]
    split_tag: str = "all"

    def __post_init__(self):
        if self.samples:
            shape = self.samples[0].values.shape
            for s in self.samples:
                if s.values.shape != shape:
                    raise FormatError(
                        f"inconsistent sample shapes: {s.values.shape} vs {shape}"
                    )
                if not np.isfinite(s.values).all():
                    raise FormatError(f"non-finite values in sample {s.id!r}")
            if shape[0] != len(self.channel_names):
                raise FormatError(
                    f"{shape[0]} channels but {len(self.channel_names)} channel names"
                )

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    @property
    def window_length(self) -> int:
        return self.samples[0].window_length if self.samples else 0


@dataclass(frozen=True)
class SyntheticParams:
    """Knobs of the quasi-periodic pulse-train generator."""

    n_samples: int = 50
    channels: int = 1
    window_length: int = 1000
    sampling_rate_hz: float = 100.0
    pulse_rate_hz: float = 1.2
    rate_jitter: float = 0.05
    pulse_width_s: float = 0.08
    baseline_freq_hz: float = 0.1
    noise_std: float = 0.05
    seed: int = 0


def default_channel_names(channels: int) -> tuple[str, ...]:
    return tuple(f"ch{i}" for i in range(channels))


# ---------------------------------------------------------------------------
# custom dataset lookup
# ---------------------------------------------------------------------------

DATA_DIR_ENV = "PULSEKIT_DATA_DIR"


def data_root(override: str | Path | None = None) -> Path:
    """Root under which custom datasets live; env PULSEKIT_DATA_DIR or ./data."""
    if override is not None:
        return Path(override)
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


def is_synthetic_name(name: str) -> bool:
    """Names reserved for the built-in generator ('synthetic', 'synthetic_*')."""
    return name == "synthetic" or name.startswith("synthetic_")


def resolve_custom_dataset(
    name: str, root: str | Path | None = None
) -> tuple[Path, str]:
    """Locate a custom dataset directory by name and infer its format.

    Inference: a meta.json sidecar means raw-f32, otherwise the presence of
    *.jsonl or *.csv files decides.
    """
    directory = data_root(root) / name
    if not directory.is_dir():
        raise DatasetIOError(directory, "custom dataset directory not found")
    if (directory / "meta.json").exists():
        return directory, "raw-f32"
    if any(directory.glob("*.jsonl")):
        return directory, "jsonl"
    if any(directory.glob("*.csv")):
        return directory, "csv"
    raise FormatError(
        f"{directory}: cannot infer dataset format (no meta.json, *.jsonl or *.csv)"
    )


# ---------------------------------------------------------------------------
# windowing / splitting / normalization
# ---------------------------------------------------------------------------

def window(continuous: np.ndarray, window_length: int, id_prefix: str = "w") -> list[Sample]:
    """Cut a (channels, T) matrix into floor(T / window_length) samples."""
    continuous = np.asarray(continuous, dtype=np.float64)
    if continuous.ndim != 2:
        raise InvalidValueError("continuous", "expected a (channels, T) matrix")
    T = continuous.shape[1]
    if window_length < 1:
        raise InvalidValueError("window_length", "must be positive")
    if T < window_length:
        raise InvalidValueError(
            "continuous", f"length {T} is shorter than window_length {window_length}"
        )
    n = T // window_length
    return [
        Sample(
            id=f"{id_prefix}{k}",
            values=continuous[:, k * window_length : (k + 1) * window_length].copy(),
        )
        for k in range(n)
    ]


def split(
    signal_set: SignalSet, fractions: Sequence[float], seed: int
) -> tuple[SignalSet, SignalSet, SignalSet]:
    """Seeded shuffle, then contiguous partition by rounded counts.

    train = round(f_train * N), val = round(f_val * N) (clamped so the
    remainder is never negative), test = remainder. Outputs are disjoint and
    cover the input.
    """
    n = len(signal_set)
    rng = np.random.default_rng(tagged_seed(seed, SPLIT_TAG))
    perm = rng.permutation(n)
    n_train = min(int(round(fractions[0] * n)), n)
    n_val = min(int(round(fractions[1] * n)), n - n_train)

    def take(indices: Iterable[int], tag: str) -> SignalSet:
        return SignalSet(
            samples=tuple(signal_set.samples[i] for i in indices),
            sampling_rate_hz=signal_set.sampling_rate_hz,
            channel_names=signal_set.channel_names,
            split_tag=tag,
        )

    return (
        take(perm[:n_train], "train"),
        take(perm[n_train : n_train + n_val], "val"),
        take(perm[n_train + n_val :], "test"),
    )


def normalize_zscore(
    signal_set: SignalSet,
) -> tuple[SignalSet, tuple[tuple[float, float], ...]]:
    """Z-score each channel across the whole set (population std).

    Returns the normalized set and the per-channel (mean, std) table so
    imputations can be de-normalized for display.
    """
    if not signal_set.samples:
        raise EmptyDatasetError("cannot normalize an empty set")
    stacked = np.stack([s.values for s in signal_set.samples])  # (N, C, T)
    means = stacked.mean(axis=(0, 2))
    stds = stacked.std(axis=(0, 2))  # population (1/N) convention
    for c, sd in enumerate(stds):
        if sd == 0.0:
            raise DegenerateChannelError(c)
    samples = tuple(
        Sample(
            id=s.id,
            values=(s.values - means[:, None]) / stds[:, None],
            load_mask=s.load_mask,
        )
        for s in signal_set.samples
    )
    stats = tuple((float(m), float(sd)) for m, sd in zip(means, stds))
    return (
        SignalSet(
            samples=samples,
            sampling_rate_hz=signal_set.sampling_rate_hz,
            channel_names=signal_set.channel_names,
            split_tag=signal_set.split_tag,
        ),
        stats,
    )


def denormalize(values: np.ndarray, stats: Sequence[tuple[float, float]]) -> np.ndarray:
    """Undo :func:`normalize_zscore` on a (channels, T) matrix."""
    values = np.asarray(values, dtype=np.float64)
    means = np.array([m for m, _ in stats])[:, None]
    stds = np.array([sd for _, sd in stats])[:, None]
    return values * stds + means


# ---------------------------------------------------------------------------
# synthetic generation
# ---------------------------------------------------------------------------

def generate_synthetic(params: SyntheticParams) -> SignalSet:
    """Quasi-periodic pulse train + sinusoidal baseline + white noise.

    Each channel of a sample shares the pulse onsets and baseline (one heart
    per subject) and gets independent noise. Deterministic for a fixed seed:
    every sample derives its own generator stream from (seed, index).
    """
    p = params
    if p.n_samples < 1:
        raise EmptyDatasetError("n_samples must be >= 1")
    if p.channels < 1:
        raise InvalidValueError("channels", "must be positive")
    if p.window_length < 4:
        raise InvalidValueError("window_length", "must be >= 4")
    if p.pulse_rate_hz <= 0 or p.sampling_rate_hz <= 0 or p.pulse_width_s <= 0:
        raise InvalidValueError("synthetic", "rates and widths must be positive")
    if not (0 <= p.rate_jitter < 0.5):
        raise InvalidValueError("rate_jitter", "must lie in [0, 0.5)")
    if p.noise_std < 0 or p.baseline_freq_hz < 0:
        raise InvalidValueError("synthetic", "noise_std and baseline_freq_hz must be >= 0")
    period = p.sampling_rate_hz / p.pulse_rate_hz
    width = p.pulse_width_s * p.sampling_rate_hz
    if period < 4 * width:
        raise InvalidValueError(
            "synthetic", "pulse period in samples must be >= 4x pulse width in samples"
        )

    t = np.arange(p.window_length)
    samples = []
    for i in range(p.n_samples):
        rng = np.random.default_rng(tagged_seed(p.seed, SYNTH_TAG, i))
        trace = np.zeros(p.window_length)
        onset = period * (rng.uniform() - 1.0)  # one pulse may straddle t=0
        while onset < p.window_length + 4 * width:
            trace += PULSE_AMPLITUDE * np.exp(-0.5 * ((t - onset) / width) ** 2)
            onset += period * (1.0 + p.rate_jitter * rng.uniform(-1.0, 1.0))
        if p.baseline_freq_hz > 0:
            phase = rng.uniform(0.0, 2.0 * np.pi)
            trace += BASELINE_AMPLITUDE * np.sin(
                2.0 * np.pi * p.baseline_freq_hz * t / p.sampling_rate_hz + phase
            )
        values = np.tile(trace, (p.channels, 1))
        if p.noise_std > 0:
            values = values + rng.normal(0.0, p.noise_std, size=values.shape)
        samples.append(Sample(id=f"synthetic-{i:04d}", values=values))
    return SignalSet(
        samples=tuple(samples),
        sampling_rate_hz=p.sampling_rate_hz,
        channel_names=default_channel_names(p.channels),
    )


def synthetic_params_from_config(data_config: "DataConfig") -> SyntheticParams:
    """Merge DataConfig geometry with the generator's own knobs."""
    extra = dict(data_config.synthetic or {})
    return SyntheticParams(
        n_samples=int(extra.get("n_samples", SyntheticParams.n_samples)),
        channels=data_config.channels,
        window_length=data_config.window_length,
        sampling_rate_hz=data_config.sampling_rate_hz,
        pulse_rate_hz=float(extra.get("pulse_rate_hz", SyntheticParams.pulse_rate_hz)),
        rate_jitter=float(extra.get("rate_jitter", SyntheticParams.rate_jitter)),
        pulse_width_s=float(extra.get("pulse_width_s", SyntheticParams.pulse_width_s)),
        baseline_freq_hz=float(extra.get("baseline_freq_hz", SyntheticParams.baseline_freq_hz)),
        noise_std=float(extra.get("noise_std", SyntheticParams.noise_std)),
        seed=data_config.seed,
    )


# ---------------------------------------------------------------------------
# file loaders
# ---------------------------------------------------------------------------

def _is_missing_marker(cell: str) -> bool:
    return cell.strip() == "" or cell.strip().lower() == "nan"


def _load_csv_file(path: Path, channels: int) -> tuple[np.ndarray, np.ndarray, list[str] | None]:
    """Returns (channels x T values, channels x T load mask, header or None)."""
    header = None
    rows: list[list[float]] = []
    mask_rows: list[list[bool]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader):
            if not row:
                continue
            if lineno == 0:
                numeric = True
                for cell in row:
                    if _is_missing_marker(cell):
                        continue
                    try:
                        float(cell)
                    except ValueError:
                        numeric = False
                        break
                if not numeric:
                    header = [c.strip() for c in row]
                    continue
            if len(row) != channels:
                raise FormatError(
                    f"{path.name}:{lineno + 1}: {len(row)} columns, expected {channels}"
                )
            vals, miss = [], []
            for col, cell in enumerate(row):
                if _is_missing_marker(cell):
                    vals.append(0.0)
                    miss.append(True)
                else:
                    try:
                        vals.append(float(cell))
                    except ValueError:
                        raise FormatError(
                            f"{path.name}:{lineno + 1}: non-numeric cell in column {col}: {cell!r}"
                        ) from None
                    miss.append(False)
            rows.append(vals)
            mask_rows.append(miss)
    if not rows:
        raise FormatError(f"{path.name}: no data rows")
    if header is not None and len(header) != channels:
        raise FormatError(f"{path.name}: header has {len(header)} names, expected {channels}")
    values = np.asarray(rows, dtype=np.float64).T  # (channels, T)
    mask = np.asarray(mask_rows, dtype=bool).T
    return values, mask, header


def _windows_with_mask(
    values: np.ndarray, mask: np.ndarray, window_length: int, id_prefix: str
) -> list[Sample]:
    if values.shape[1] < window_length:
        raise FormatError(
            f"{id_prefix}: {values.shape[1]} timesteps, shorter than window_length {window_length}"
        )
    out = []
    for k, s in enumerate(window(values, window_length, id_prefix=f"{id_prefix}/")):
        m = mask[:, k * window_length : (k + 1) * window_length]
        out.append(
            Sample(id=s.id, values=s.values, load_mask=m.copy() if m.any() else None)
        )
    return out


def load_csv_dataset(root: Path, data_config: "DataConfig") -> SignalSet:
    files = sorted(root.glob("*.csv"))
    if not files:
        raise EmptyDatasetError(f"no *.csv files under {root}")
    samples: list[Sample] = []
    channel_names: tuple[str, ...] | None = None
    for f in files:
        values, mask, header = _load_csv_file(f, data_config.channels)
        if channel_names is None and header is not None:
            channel_names = tuple(header)
        samples.extend(
            _windows_with_mask(values, mask, data_config.window_length, f.stem)
        )
    return SignalSet(
        samples=tuple(samples),
        sampling_rate_hz=data_config.sampling_rate_hz,
        channel_names=channel_names or default_channel_names(data_config.channels),
    )


def load_raw_f32_dataset(root: Path, data_config: "DataConfig") -> SignalSet:
    meta_path = root / "meta.json"
    if not meta_path.exists():
        raise FormatError(f"{root}: raw-f32 dataset requires a meta.json sidecar")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"meta.json: {e}") from e
    for key in ("channels", "sampling_rate_hz", "record_length", "dtype"):
        if key not in meta:
            raise FormatError(f"meta.json: missing key {key!r}")
    if meta["dtype"] != "f32le":
        raise FormatError(f"meta.json: unsupported dtype {meta['dtype']!r}")
    channels = int(meta["channels"])
    record_length = int(meta["record_length"])
    if channels != data_config.channels:
        raise FormatError(
            f"meta.json declares {channels} channels, config says {data_config.channels}"
        )
    files = sorted(root.glob("*.f32"))
    if not files:
        raise EmptyDatasetError(f"no *.f32 files under {root}")
    samples: list[Sample] = []
    for f in files:
        raw = f.read_bytes()
        if len(raw) % (4 * channels) != 0:
            raise FormatError(f"{f.name}: byte length not divisible by 4*channels")
        if len(raw) % (4 * channels * record_length) != 0:
            raise FormatError(f"{f.name}: byte length is not a whole number of records")
        flat = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        records = flat.reshape(-1, channels, record_length)
        for r, rec in enumerate(records):
            if record_length < data_config.window_length:
                raise FormatError(
                    f"{f.name}: record_length {record_length} shorter than "
                    f"window_length {data_config.window_length}"
                )
            samples.extend(
                window(rec, data_config.window_length, id_prefix=f"{f.stem}/{r}/")
            )
    return SignalSet(
        samples=tuple(samples),
        sampling_rate_hz=float(meta["sampling_rate_hz"]),
        channel_names=default_channel_names(channels),
    )


def load_jsonl_dataset(root: Path, data_config: "DataConfig") -> SignalSet:
    files = sorted(root.glob("*.jsonl"))
    if not files:
        raise EmptyDatasetError(f"no *.jsonl files under {root}")
    samples: list[Sample] = []
    for f in files:
        with open(f) as fh:
            for lineno, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as e:
                    raise FormatError(f"{f.name}:{lineno + 1}: {e}") from e
                if not isinstance(rec, dict) or "id" not in rec or "values" not in rec:
                    raise FormatError(f"{f.name}:{lineno + 1}: record needs id and values")
                try:
                    arr = np.asarray(rec["values"], dtype=np.float64)
                except ValueError as e:
                    raise FormatError(f"{f.name}:{lineno + 1}: ragged values array") from e
                if arr.ndim != 2 or arr.shape[0] != data_config.channels:
                    raise FormatError(
                        f"{f.name}:{lineno + 1}: values must be a "
                        f"{data_config.channels} x T array"
                    )
                mask = ~np.isfinite(arr)  # null -> NaN via asarray
                arr = np.where(mask, 0.0, arr)
                wins = _windows_with_mask(arr, mask, data_config.window_length, str(rec["id"]))
                if len(wins) == 1:
                    wins = [
                        Sample(id=str(rec["id"]), values=wins[0].values, load_mask=wins[0].load_mask)
                    ]
                samples.extend(wins)
    return SignalSet(
        samples=tuple(samples),
        sampling_rate_hz=data_config.sampling_rate_hz,
        channel_names=default_channel_names(data_config.channels),
    )


_LOADERS = {
    "csv": load_csv_dataset,
    "raw-f32": load_raw_f32_dataset,
    "jsonl": load_jsonl_dataset,
}


def load_dataset(data_config: "DataConfig") -> SignalSet:
    """Load (or generate) the dataset described by a validated DataConfig."""
    if data_config.format == "synthetic":
        return generate_synthetic(synthetic_params_from_config(data_config))
    root = Path(data_config.path) if data_config.path else None
    if root is None or not root.exists():
        raise DatasetIOError(data_config.path)
    if not root.is_dir():
        raise DatasetIOError(data_config.path, "expected a dataset directory")
    loader = _LOADERS.get(data_config.format)
    if loader is None:
        raise FormatError(f"unsupported format {data_config.format!r}")
    signal_set = loader(root, data_config)
    if not signal_set.samples:
        raise EmptyDatasetError(f"{root}: dataset produced no samples")
    return signal_set


def save_raw_f32(signal_set: SignalSet, root: Path) -> None:
    """Write a SignalSet as a raw-f32 dataset (meta.json + signals.f32).

    Values are stored as little-endian float32; one record per sample,
    channel-major. Reloading reproduces the float32 values bit-exactly.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    if not signal_set.samples:
        raise EmptyDatasetError("cannot serialize an empty set")
    meta = {
        "channels": signal_set.n_channels,
        "sampling_rate_hz": signal_set.sampling_rate_hz,
        "record_length": signal_set.window_length,
        "dtype": "f32le",
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    buf = np.concatenate([s.values.astype("<f4").ravel() for s in signal_set.samples])
    (root / "signals.f32").write_bytes(buf.tobytes())
