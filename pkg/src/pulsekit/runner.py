"""Experiment orchestration: config -> data -> missingness -> impute ->
evaluate -> report + visualization bundle.

Output layout is ``results/<experiment>/<model>/{report.json, bundle.json,
fitted_state.bin}``. A run is guarded by a lockfile so two runners never write
the same directory; a stage failure leaves its diagnostics under ``failed/``
inside the run's own directory, never touching other models' results.
"""

from __future__ import annotations

import json
import os
import traceback
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import (
    DataConfig,
    ExperimentConfig,
    ModelConfig,
    TrainConfig,
    config_digest,
    validate,
)
from .config import _raise_first  # shared raise-on-first-violation helper
from .dataset import (
    Sample,
    default_channel_names,
    denormalize,
    is_synthetic_name,
    load_dataset,
    normalize_zscore,
    resolve_custom_dataset,
    split,
)
from .errors import (
    AlignmentError,
    InvalidValueError,
    MissingResultsError,
    PulsekitError,
    StageError,
)
from .evaluation import (
    EvaluationReport,
    SampleScore,
    aggregate,
    mae_missing,
    mse_missing,
    write_report,
)
from .imputers import FittedState, ImputationResult, create_imputer, impute_batch
from .missingness import Mask, MaskedSample, MissingnessSpec, apply_missingness

BUNDLE_VERSION = 1
CONTEXT_MARGIN = 100  # timesteps of context stored around each missing run


@dataclass(frozen=True)
class RunOutcome:
    report: EvaluationReport
    bundle_path: Path
    fitted_state_path: Path | None
    exit_code: int


# ---------------------------------------------------------------------------
# bundle export
# ---------------------------------------------------------------------------

def _merged_segments(runs: list[tuple[int, int]], T: int, margin: int) -> list[tuple[int, int]]:
    """Expand runs by the context margin, clip to the window, merge overlaps."""
    intervals = [(max(0, s - margin), min(T, s + ln + margin)) for s, ln in runs]
    intervals.sort()
    merged: list[tuple[int, int]] = []
    for lo, hi in intervals:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def export_bundle(
    masked_samples: Sequence[MaskedSample],
    results_by_model: dict[str, Sequence[ImputationResult]],
    *,
    experiment: str,
    missingness_type: str,
    missingness_percent: float,
    sampling_rate_hz: float,
    channel_names: Sequence[str] | None = None,
    stats: Sequence[tuple[float, float]] | None = None,
    context_margin: int = CONTEXT_MARGIN,
) -> dict:
    """Build the viewer-consumable bundle document (schema version 1).

    Imputations are stored only around missing runs (plus a context margin) to
    bound size; ground truth is stored in full for context rendering. Metrics
    are computed per entry on the missing region, in the same (normalized)
    space the report uses; series are de-normalized with ``stats`` when given.
    Multi-channel samples produce one entry per channel, id-suffixed ``/chK``.
    """
    if not results_by_model:
        raise InvalidValueError("results_by_model", "at least one model's results required")
    ids = [m.observed.id for m in masked_samples]
    for model, results in results_by_model.items():
        got = [r.sample_id for r in results]
        if got != ids:
            raise AlignmentError(f"model {model!r} results do not align with samples: {got} != {ids}")

    n_channels = masked_samples[0].observed.n_channels if masked_samples else 0
    if channel_names is None:
        channel_names = default_channel_names(n_channels)
    if stats is None:
        stats = tuple((0.0, 1.0) for _ in range(n_channels))

    entries = []
    for k, masked in enumerate(masked_samples):
        truth = masked.ground_truth.values
        T = truth.shape[1]
        truth_display = denormalize(truth, stats)
        for c in range(n_channels):
            runs = Mask(masked.mask.missing).runs(c)
            entry_id = masked.observed.id if n_channels == 1 else f"{masked.observed.id}/ch{c}"
            imputations: dict[str, list[dict]] = {}
            metrics: dict[str, dict[str, float]] = {}
            for model, results in results_by_model.items():
                imputed = results[k].imputed.values
                imputed_display = denormalize(imputed, stats)
                segs = []
                for lo, hi in _merged_segments(runs, T, context_margin):
                    segs.append(
                        {"start": lo, "values": imputed_display[c, lo:hi].tolist()}
                    )
                imputations[model] = segs
                row_mask = masked.mask.missing[c : c + 1]
                if row_mask.any():
                    mse, _ = mse_missing(truth[c : c + 1], imputed[c : c + 1], row_mask)
                    mae, _ = mae_missing(truth[c : c + 1], imputed[c : c + 1], row_mask)
                    metrics[model] = {"mse": mse, "mae": mae}
                else:
                    metrics[model] = {"mse": 0.0, "mae": 0.0}
            entries.append(
                {
                    "id": entry_id,
                    "channel": channel_names[c],
                    "truth": truth_display[c].tolist(),
                    "missing_runs": [[s, ln] for s, ln in runs],
                    "imputations": imputations,
                    "metrics": metrics,
                }
            )
    return {
        "version": BUNDLE_VERSION,
        "experiment": experiment,
        "missingness": {"type": missingness_type, "percent": missingness_percent},
        "sampling_rate_hz": sampling_rate_hz,
        "models": sorted(results_by_model),
        "samples": entries,
    }


def write_bundle(bundle: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(bundle, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# the pipeline
# ---------------------------------------------------------------------------

class _RunLock:
    """Exclusive lockfile; the runner is not re-entrant per output directory."""

    def __init__(self, directory: Path):
        self.path = directory / ".lock"

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise PulsekitError(
                f"output directory is locked by another run: {self.path}"
            ) from None
        os.close(fd)
        return self

    def __exit__(self, *exc):
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass
        return False


def _split_eval_masks(masked_samples: list[MaskedSample]) -> tuple[list[MaskedSample], list[np.ndarray]]:
    """Fold load-time masks in: imputers treat them as missing, metrics skip
    them (there is no ground truth under a load marker)."""
    folded: list[MaskedSample] = []
    eval_masks: list[np.ndarray] = []
    for m in masked_samples:
        load_mask = m.ground_truth.load_mask
        if load_mask is None:
            folded.append(m)
            eval_masks.append(m.mask.missing)
            continue
        union = m.mask.missing | load_mask
        observed_values = np.where(union, 0.0, m.ground_truth.values)
        folded.append(
            MaskedSample(
                observed=Sample(id=m.observed.id, values=observed_values),
                mask=Mask(missing=union),
                ground_truth=m.ground_truth,
            )
        )
        eval_masks.append(m.mask.missing & ~load_mask)
    return folded, eval_masks


def run_experiment(config: ExperimentConfig, output_root: str | Path = "results") -> RunOutcome:
    """Run the whole workflow for one config; deterministic given the config."""
    _raise_first(validate(config))  # fail before touching any data or disk

    out_dir = Path(output_root) / config.experiment_name / config.model.name
    stage = "setup"
    try:
        with _RunLock(out_dir):
            stage = "load"
            signal_set = load_dataset(config.data)

            stage = "normalize"
            if config.data.normalization == "zscore":
                signal_set, stats = normalize_zscore(signal_set)
            else:
                stats = tuple((0.0, 1.0) for _ in signal_set.channel_names)

            stage = "split"
            train_set, _val_set, test_set = split(signal_set, config.data.split, config.data.seed)
            eval_set = test_set if len(test_set) > 0 else signal_set

            stage = "missingness"
            spec = config.data.missingness
            if spec.seed is None:
                spec = MissingnessSpec(
                    type=spec.type,
                    percent=spec.percent,
                    max_gap=spec.max_gap,
                    pattern_path=spec.pattern_path,
                    per_channel=spec.per_channel,
                    seed=config.data.seed,
                )
            masked = apply_missingness(eval_set, spec)
            masked, eval_masks = _split_eval_masks(masked)

            stage = "fit"
            imputer = create_imputer(config.model.name, config.model.params)
            fitted_state_path = None
            if config.train.enabled:
                state = imputer.fit(train_set)
                if not state.is_empty:
                    fitted_state_path = out_dir / "fitted_state.bin"
                    fitted_state_path.parent.mkdir(parents=True, exist_ok=True)
                    with open(fitted_state_path, "wb") as fh:
                        np.save(fh, state.channel_means)
            else:
                state = FittedState.empty()

            stage = "impute"
            results = impute_batch(imputer, state, masked, batch_size=config.train.batch_size)

            stage = "evaluate"
            scores = []
            for m, r, emask in zip(masked, results, eval_masks):
                mse, n = mse_missing(m.ground_truth.values, r.imputed.values, emask)
                mae, _ = mae_missing(m.ground_truth.values, r.imputed.values, emask)
                scores.append(SampleScore(sample_id=m.observed.id, mse=mse, mae=mae, n_missing=n))
            report = aggregate(
                scores,
                experiment_name=config.experiment_name,
                model_name=config.model.name,
                config_digest=config_digest(config),
                seed=config.data.seed,
            )

            stage = "export"
            bundle = export_bundle(
                masked,
                {config.model.name: results},
                experiment=config.experiment_name,
                missingness_type=spec.type,
                missingness_percent=spec.percent,
                sampling_rate_hz=signal_set.sampling_rate_hz,
                channel_names=signal_set.channel_names,
                stats=stats,
            )
            write_report(report, out_dir / "report.json")
            bundle_path = write_bundle(bundle, out_dir / "bundle.json")
    except Exception as e:
        _write_failure(out_dir, stage, e)
        raise StageError(stage, e) from e

    return RunOutcome(
        report=report,
        bundle_path=bundle_path,
        fitted_state_path=fitted_state_path,
        exit_code=0,
    )


def _write_failure(out_dir: Path, stage: str, error: Exception) -> None:
    failed = out_dir / "failed"
    try:
        failed.mkdir(parents=True, exist_ok=True)
        (failed / "error.txt").write_text(
            f"stage: {stage}\nerror: {error!r}\n\n{traceback.format_exc()}"
        )
    except OSError:
        pass  # diagnostics are best-effort


# ---------------------------------------------------------------------------
# default experiment for bare `-d` runs
# ---------------------------------------------------------------------------

def _infer_channels(path: Path, fmt: str) -> int:
    if fmt == "raw-f32":
        return int(json.loads((path / "meta.json").read_text())["channels"])
    if fmt == "csv":
        first = sorted(path.glob("*.csv"))[0]
        with open(first) as fh:
            return len(fh.readline().rstrip("\n").split(","))
    if fmt == "jsonl":
        first = sorted(path.glob("*.jsonl"))[0]
        with open(first) as fh:
            rec = json.loads(fh.readline())
        return len(rec["values"])
    return 1


def default_config_for_dataset(
    dataset_name: str, data_root: str | Path | None = None
) -> ExperimentConfig:
    """The config used when only ``-d`` is given: evaluate the strongest
    in-scope imputer (fft) on the named dataset with extended 30% missingness."""
    if is_synthetic_name(dataset_name):
        data = DataConfig(
            dataset_name=dataset_name,
            format="synthetic",
            missingness=MissingnessSpec(type="extended", percent=0.3, seed=0),
        )
    else:
        path, fmt = resolve_custom_dataset(dataset_name, data_root)
        data = DataConfig(
            dataset_name=dataset_name,
            format=fmt,
            path=str(path),
            channels=_infer_channels(path, fmt),
            missingness=MissingnessSpec(type="extended", percent=0.3, seed=0),
        )
    return ExperimentConfig(
        experiment_name=f"default-{dataset_name}",
        data=data,
        model=ModelConfig(name="fft", params={}),
        train=TrainConfig(enabled=False),
    )


# ---------------------------------------------------------------------------
# standalone visualization
# ---------------------------------------------------------------------------

def visualize_standalone(
    task: str,
    models: Sequence[str],
    sample_index: int = 0,
    x_range: int | None = None,
    save_path: str | Path = "imputation.svg",
    miss_type: str | None = None,
    miss_percent: float | None = None,
    results_root: str | Path = "results",
) -> Path:
    """Render ground truth plus each model's imputation for one sample to SVG.

    Reads the per-model bundles that an earlier run wrote to disk, so it works
    without re-running any experiment. Raster formats are out of scope; the
    save path must end in .svg.
    """
    save_path = Path(save_path)
    if save_path.suffix.lower() != ".svg":
        raise InvalidValueError("save_path", "SVG output only; use a .svg path")
    if not models:
        raise InvalidValueError("models", "at least one model required")

    bundles = {}
    for model in models:
        bundle_path = Path(results_root) / task / model / "bundle.json"
        if not bundle_path.exists():
            raise MissingResultsError(model, bundle_path)
        bundles[model] = json.loads(bundle_path.read_text())

    for model, bundle in bundles.items():
        miss = bundle.get("missingness", {})
        if miss_type is not None and miss.get("type") != miss_type:
            raise InvalidValueError(
                "miss_type", f"results for {model!r} use {miss.get('type')!r}, not {miss_type!r}"
            )
        if miss_percent is not None and abs(miss.get("percent", -1) - miss_percent) > 1e-12:
            raise InvalidValueError(
                "miss_percent",
                f"results for {model!r} use percent={miss.get('percent')}, not {miss_percent}",
            )

    first = bundles[models[0]]
    if not (0 <= sample_index < len(first["samples"])):
        raise InvalidValueError("sample_index", f"out of range [0, {len(first['samples'])})")
    ref_entry = first["samples"][sample_index]
    for model in models[1:]:
        other = bundles[model]["samples"]
        if sample_index >= len(other) or other[sample_index]["id"] != ref_entry["id"]:
            raise AlignmentError(f"sample ids disagree between models at index {sample_index}")

    truth = ref_entry["truth"]
    T = len(truth)
    x_hi = T if x_range is None else max(1, min(int(x_range), T))

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.fonttype"] = "none"  # keep labels as searchable text
    fig, ax = plt.subplots(figsize=(12, 4))
    for start, length in ref_entry["missing_runs"]:
        lo, hi = start, min(start + length, x_hi)
        if lo < x_hi:
            ax.axvspan(lo, hi, color="0.85", zorder=0, label="_missing")
    ax.plot(range(x_hi), truth[:x_hi], color="black", lw=1.0, label="ground truth")
    for model in models:
        entry = bundles[model]["samples"][sample_index]
        for seg in entry["imputations"][model]:
            start = seg["start"]
            vals = seg["values"]
            if start >= x_hi:
                continue
            end = min(start + len(vals), x_hi)
            ax.plot(
                range(start, end),
                vals[: end - start],
                lw=1.0,
                alpha=0.9,
                label=model if seg is entry["imputations"][model][0] else "_nolegend_",
            )
    ax.set_xlim(0, x_hi)
    ax.set_xlabel("timestep")
    ax.set_ylabel("amplitude")
    ax.set_title(f"{task} / sample {ref_entry['id']}")
    ax.legend(loc="upper right", fontsize=8)
    save_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(save_path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return save_path
