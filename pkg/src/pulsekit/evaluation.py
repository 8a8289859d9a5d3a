"""Scoring imputations against ground truth on the missing region only.

Observed positions contribute nothing to any metric (every in-scope imputer
preserves them, so whole-signal metrics would just dilute). Aggregation
weights per-sample scores by their missing counts, making the aggregate equal
to the pooled error over all missing positions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Sample
from .errors import EmptyDatasetError, EmptyMaskError, InvalidValueError
from .missingness import Mask


def _as_matrix(x) -> np.ndarray:
    return x.values if isinstance(x, Sample) else np.asarray(x, dtype=np.float64)


def _as_mask(m) -> np.ndarray:
    return m.missing if isinstance(m, Mask) else np.asarray(m, dtype=bool)


def _missing_errors(ground_truth, imputed, mask) -> np.ndarray:
    truth = _as_matrix(ground_truth)
    pred = _as_matrix(imputed)
    miss = _as_mask(mask)
    if truth.shape != pred.shape or truth.shape != miss.shape:
        raise InvalidValueError(
            "shapes", f"truth {truth.shape}, imputed {pred.shape}, mask {miss.shape} must match"
        )
    if not miss.any():
        raise EmptyMaskError("no missing positions to score")
    return pred[miss] - truth[miss]


def mse_missing(ground_truth, imputed, mask) -> tuple[float, int]:
    """Mean squared error over missing positions; returns (mse, n_missing)."""
    err = _missing_errors(ground_truth, imputed, mask)
    return float(np.mean(err**2)), int(err.size)


def mae_missing(ground_truth, imputed, mask) -> tuple[float, int]:
    """Mean absolute error over missing positions; returns (mae, n_missing)."""
    err = _missing_errors(ground_truth, imputed, mask)
    return float(np.mean(np.abs(err))), int(err.size)


@dataclass(frozen=True)
class SampleScore:
    sample_id: str
    mse: float
    mae: float
    n_missing: int


@dataclass(frozen=True)
class EvaluationReport:
    experiment_name: str
    model_name: str
    n_samples: int
    per_sample: tuple[SampleScore, ...]
    aggregate_mse: float
    aggregate_mae: float
    config_digest: str
    seed: int

    def to_dict(self) -> dict:
        return {
            "experiment_name": self.experiment_name,
            "model_name": self.model_name,
            "n_samples": self.n_samples,
            "per_sample": [
                {
                    "sample_id": s.sample_id,
                    "mse": s.mse,
                    "mae": s.mae,
                    "n_missing": s.n_missing,
                }
                for s in self.per_sample
            ],
            "aggregate": {"mse": self.aggregate_mse, "mae": self.aggregate_mae},
            "config_digest": self.config_digest,
            "seed": self.seed,
        }


def aggregate(
    per_sample: list[SampleScore],
    experiment_name: str,
    model_name: str,
    config_digest: str,
    seed: int,
) -> EvaluationReport:
    """Missing-count-weighted aggregation, summed in fixed sample order."""
    if not per_sample:
        raise EmptyDatasetError("no per-sample scores to aggregate")
    total = sum(s.n_missing for s in per_sample)
    mse = sum(s.mse * s.n_missing for s in per_sample) / total
    mae = sum(s.mae * s.n_missing for s in per_sample) / total
    return EvaluationReport(
        experiment_name=experiment_name,
        model_name=model_name,
        n_samples=len(per_sample),
        per_sample=tuple(per_sample),
        aggregate_mse=float(mse),
        aggregate_mae=float(mae),
        config_digest=config_digest,
        seed=seed,
    )


def write_report(report: EvaluationReport, path: str | Path) -> Path:
    """Pretty-printed JSON with stable key order (no timestamps)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return path
