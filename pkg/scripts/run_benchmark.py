#!/usr/bin/env python3
"""Run the three bundled classical imputers on the synthetic pulsative
dataset and print the comparison table (the ordering experiment)."""

import argparse
import sys
from pathlib import Path

from pulsekit import load_config
from pulsekit.runner import run_experiment

REPO = Path(__file__).parent.parent
BUNDLED = [
    ("FFT", "fft"),
    ("LinearInterp", "linear_interp"),
    ("MeanFill", "mean_fill"),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--results-dir", default="results")
    parser.add_argument("--experiment", default="synthetic_extended30")
    args = parser.parse_args()

    rows = []
    for subdir, model in BUNDLED:
        cfg = load_config(REPO / "configs" / subdir / f"{args.experiment}.yaml")
        outcome = run_experiment(cfg, output_root=args.results_dir)
        rows.append((model, outcome.report.aggregate_mse, outcome.report.aggregate_mae))
        print(f"ran {model}: mse={outcome.report.aggregate_mse:.4f}")

    print()
    print(f"{'model':<14} {'mse':>10} {'mae':>10}")
    for model, mse, mae in sorted(rows, key=lambda r: r[1]):
        print(f"{model:<14} {mse:>10.4f} {mae:>10.4f}")
    ordered = [m for m, _, _ in sorted(rows, key=lambda r: r[1])]
    print(f"\nordering: {' < '.join(ordered)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
