#!/usr/bin/env python3
"""Build the demo comparison bundle consumed by the browser viewer:
5 synthetic samples, extended 30% missingness, all three classical imputers."""

import argparse
import sys
from pathlib import Path

from pulsekit.dataset import SyntheticParams, generate_synthetic, normalize_zscore
from pulsekit.imputers import create_imputer, impute_batch
from pulsekit.missingness import MissingnessSpec, apply_missingness
from pulsekit.runner import export_bundle, write_bundle

MODELS = {
    "fft": {"top_k": 10},
    "linear_interp": {},
    "mean_fill": {},
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="frontend/demo/bundle.json")
    parser.add_argument("--n-samples", type=int, default=5)
    parser.add_argument("--percent", type=float, default=0.3)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    raw = generate_synthetic(SyntheticParams(n_samples=args.n_samples, seed=args.seed))
    normed, stats = normalize_zscore(raw)
    spec = MissingnessSpec(type="extended", percent=args.percent, seed=args.seed)
    masked = apply_missingness(normed, spec)

    results = {
        name: impute_batch(create_imputer(name, params), None, masked)
        for name, params in MODELS.items()
    }
    bundle = export_bundle(
        masked,
        results,
        experiment="demo_synthetic_extended30",
        missingness_type=spec.type,
        missingness_percent=spec.percent,
        sampling_rate_hz=normed.sampling_rate_hz,
        channel_names=normed.channel_names,
        stats=stats,
    )
    out = write_bundle(bundle, Path(args.out))
    print(f"wrote {out} ({out.stat().st_size} bytes, {len(bundle['samples'])} samples, "
          f"{len(bundle['models'])} models)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
