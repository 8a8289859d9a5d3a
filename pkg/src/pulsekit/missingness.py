"""Missingness mechanisms: mask generation and application.

Mechanisms are pure functions of (sample shape, MissingnessSpec, seed). When a
whole set is masked, each sample's seed derives from the configured seed and
the sample index (see :mod:`pulsekit.seeding`), so masks are reproducible and
samples can be processed independently.

Missing values are zeroed in ``observed``; the mask is the single source of
truth. By default one mask row is shared by all channels of a sample
(simultaneous sensor dropout); ``per_channel=True`` draws independent masks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .dataset import Sample, SignalSet
from .errors import (
    ChannelFullyMissingError,
    DatasetIOError,
    FormatError,
    InvalidValueError,
    PlacementFailureError,
    UnknownMissingnessError,
)
from .seeding import sample_seed

DEFAULT_MAX_GAP = 50
_PLACEMENT_ATTEMPTS = 100


@dataclass(frozen=True)
class MissingnessSpec:
    """Configured missingness mechanism; ``seed`` inherits the data seed."""

    type: str
    percent: float = 0.0
    max_gap: int = DEFAULT_MAX_GAP
    pattern_path: str | None = None
    per_channel: bool = False
    seed: int | None = None


@dataclass(frozen=True)
class Mask:
    """Boolean (channels, window_length) matrix; True marks missing."""

    missing: np.ndarray

    def runs(self, channel: int = 0) -> list[tuple[int, int]]:
        """Maximal missing runs on a channel as (start, length) pairs."""
        row = self.missing[channel]
        edges = np.flatnonzero(np.diff(np.concatenate(([0], row.view(np.int8), [0]))))
        return [(int(s), int(e - s)) for s, e in zip(edges[::2], edges[1::2])]


@dataclass(frozen=True)
class MaskedSample:
    """A sample with simulated missingness plus its preserved ground truth."""

    observed: Sample
    mask: Mask
    ground_truth: Sample


def _mask_sample(sample: Sample, missing: np.ndarray) -> MaskedSample:
    missing = np.asarray(missing, dtype=bool)
    if missing.shape != sample.values.shape:
        raise InvalidValueError("mask", "shape does not match sample")
    observed_values = np.where(missing, 0.0, sample.values)
    return MaskedSample(
        observed=Sample(id=sample.id, values=observed_values, load_mask=sample.load_mask),
        mask=Mask(missing=missing),
        ground_truth=sample,
    )


def _broadcast(row: np.ndarray, channels: int) -> np.ndarray:
    return np.tile(row, (channels, 1))


def _block_row(T: int, length: int, rng: np.random.Generator) -> np.ndarray:
    start = int(rng.integers(0, T - length + 1))
    row = np.zeros(T, dtype=bool)
    row[start : start + length] = True
    return row


def apply_extended(
    sample: Sample, percent: float, seed: int, per_channel: bool = False
) -> MaskedSample:
    """One contiguous missing block of exactly round(percent * T) timesteps."""
    T = sample.window_length
    if not (0.0 < percent < 1.0):
        raise InvalidValueError("percent", "must lie in (0, 1) for extended missingness")
    length = int(round(percent * T))
    if length < 1 or length > T - 1:
        raise InvalidValueError("percent", f"block of {length} timesteps is not maskable")
    rng = np.random.default_rng(seed)
    if per_channel:
        missing = np.stack([_block_row(T, length, rng) for _ in range(sample.n_channels)])
    else:
        missing = _broadcast(_block_row(T, length, rng), sample.n_channels)
    return _mask_sample(sample, missing)


def _transient_row(T: int, total: int, max_gap: int, rng: np.random.Generator) -> np.ndarray:
    lengths: list[int] = []
    acc = 0
    while acc < total:
        g = int(rng.integers(1, max_gap + 1))
        if acc + g > total:
            g = total - acc  # truncate the last gap to hit the exact total
        lengths.append(g)
        acc += g
    row = np.zeros(T, dtype=bool)
    for g in lengths:
        placed = False
        for _ in range(_PLACEMENT_ATTEMPTS):
            start = int(rng.integers(0, T - g + 1))
            # keep one observed sample of separation so runs never merge
            lo = max(0, start - 1)
            hi = min(T, start + g + 1)
            if not row[lo:hi].any():
                row[start : start + g] = True
                placed = True
                break
        if not placed:
            raise PlacementFailureError(
                f"could not place a gap of {g} after {_PLACEMENT_ATTEMPTS} attempts "
                f"(total={total}, max_gap={max_gap}, T={T})"
            )
    return row


def apply_transient(
    sample: Sample,
    percent: float,
    max_gap: int,
    seed: int,
    per_channel: bool = False,
) -> MaskedSample:
    """Scattered short gaps totalling exactly round(percent * T) timesteps.

    Gap lengths are uniform on [1, max_gap] (last gap truncated); start
    positions are uniform and non-overlapping, with a one-sample buffer so no
    maximal run exceeds max_gap.
    """
    T = sample.window_length
    if not (0.0 < percent < 1.0):
        raise InvalidValueError("percent", "must lie in (0, 1) for transient missingness")
    if max_gap < 1:
        raise InvalidValueError("max_gap", "must be >= 1")
    total = int(round(percent * T))
    if total < 1 or total > T - 1:
        raise InvalidValueError("percent", f"total of {total} timesteps is not maskable")
    rng = np.random.default_rng(seed)
    if per_channel:
        missing = np.stack(
            [_transient_row(T, total, max_gap, rng) for _ in range(sample.n_channels)]
        )
    else:
        missing = _broadcast(_transient_row(T, total, max_gap, rng), sample.n_channels)
    return _mask_sample(sample, missing)


def apply_mcar_points(
    sample: Sample, percent: float, seed: int, per_channel: bool = False
) -> MaskedSample:
    """Each timestep independently missing with probability ``percent``."""
    T = sample.window_length
    if not (0.0 <= percent < 1.0):
        raise InvalidValueError("percent", "must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    if per_channel:
        missing = rng.random((sample.n_channels, T)) < percent
    else:
        missing = _broadcast(rng.random(T) < percent, sample.n_channels)
    return _mask_sample(sample, missing)


def load_pattern_file(path: str | Path) -> list[np.ndarray]:
    """Read a pattern file: CSV of 0/1 integers, one mask per row."""
    path = Path(path)
    if not path.exists():
        raise DatasetIOError(path)
    rows: list[np.ndarray] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            vals = []
            for cell in row:
                cell = cell.strip()
                if cell not in ("0", "1"):
                    raise FormatError(
                        f"{path.name}:{lineno + 1}: pattern cells must be 0 or 1, got {cell!r}"
                    )
                vals.append(cell == "1")
            rows.append(np.asarray(vals, dtype=bool))
    if not rows:
        raise FormatError(f"{path.name}: pattern file has no rows")
    return rows


def apply_pattern(
    sample: Sample, pattern_path: str | Path, seed: int, per_channel: bool = False
) -> MaskedSample:
    """Crop a recorded real-world mask onto the sample.

    One pattern row is selected uniformly and cropped at a uniform offset to
    the window length. With ``per_channel=True`` and at least as many rows as
    channels, each channel gets its own (distinct) row.
    """
    T = sample.window_length
    rows = load_pattern_file(pattern_path)
    for i, row in enumerate(rows):
        if len(row) < T:
            raise FormatError(f"pattern row {i} has length {len(row)} < window {T}")
    rng = np.random.default_rng(seed)

    def crop(row: np.ndarray) -> np.ndarray:
        offset = int(rng.integers(0, len(row) - T + 1))
        return row[offset : offset + T]

    if per_channel and len(rows) >= sample.n_channels:
        picks = rng.choice(len(rows), size=sample.n_channels, replace=False)
        missing = np.stack([crop(rows[int(i)]) for i in picks])
    else:
        missing = _broadcast(crop(rows[int(rng.integers(0, len(rows)))]), sample.n_channels)
    return _mask_sample(sample, missing)


def min_observed_guard(masked: MaskedSample) -> MaskedSample:
    """Reject masks leaving fewer than 2 observed points on any channel.

    Mean fill needs >= 1 observed and interpolation >= 2; the stricter bound
    is enforced centrally here.
    """
    observed_counts = (~masked.mask.missing).sum(axis=1)
    for c, count in enumerate(observed_counts):
        if count < 2:
            raise ChannelFullyMissingError(c)
    return masked


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

MechanismFn = Callable[[Sample, MissingnessSpec, int], MaskedSample]

_MECHANISMS: dict[str, MechanismFn] = {}


def register_mechanism(name: str, fn: MechanismFn) -> None:
    """Register a custom mechanism: fn(sample, spec, seed) -> MaskedSample."""
    _MECHANISMS[name] = fn


def available_mechanisms() -> tuple[str, ...]:
    return tuple(sorted(_MECHANISMS))


def dispatch(spec: MissingnessSpec) -> MechanismFn:
    try:
        return _MECHANISMS[spec.type]
    except KeyError:
        raise UnknownMissingnessError(spec.type) from None


register_mechanism(
    "extended",
    lambda sample, spec, seed: apply_extended(sample, spec.percent, seed, spec.per_channel),
)
register_mechanism(
    "transient",
    lambda sample, spec, seed: apply_transient(
        sample, spec.percent, spec.max_gap, seed, spec.per_channel
    ),
)
register_mechanism(
    "mcar_points",
    lambda sample, spec, seed: apply_mcar_points(sample, spec.percent, seed, spec.per_channel),
)
register_mechanism(
    "pattern_file",
    lambda sample, spec, seed: apply_pattern(sample, spec.pattern_path, seed, spec.per_channel),
)


def apply_missingness(signal_set: SignalSet, spec: MissingnessSpec) -> list[MaskedSample]:
    """Mask every sample of a set, deriving per-sample seeds from spec.seed."""
    if spec.seed is None:
        raise InvalidValueError("missingness.seed", "seed must be resolved before application")
    mechanism = dispatch(spec)
    out = []
    for index, sample in enumerate(signal_set):
        masked = mechanism(sample, spec, sample_seed(spec.seed, index))
        out.append(min_observed_guard(masked))
    return out
