"""Command-line interface.

    pulsekit run [-c CONFIG_PATH] [-d DATASET_NAME] [-train BOOL]
    pulsekit visualize --task NAME --models m1,m2 --save-path out.svg ...

Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import CliOverrides, load_config, merge_overrides
from .errors import PulsekitError
from .runner import default_config_for_dataset, run_experiment, visualize_standalone

CONFIG_SEARCH_DIR = "configs"


def _parse_bool(token: str) -> bool:
    lowered = token.strip().lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    raise argparse.ArgumentTypeError(f"expected True or False, got {token!r}")


def resolve_config_path(path: str) -> Path:
    """Accept a path as given, or relative to the configs/ hierarchy."""
    p = Path(path)
    if p.exists():
        return p
    candidate = Path(CONFIG_SEARCH_DIR) / path
    if candidate.exists():
        return candidate
    raise PulsekitError(f"config file not found: {path} (also tried {candidate})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsekit",
        description="Workbench for imputing missing regions in quasi-periodic biosignals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the full experiment workflow")
    run_p.add_argument("-c", "--config", dest="config_path", metavar="CONFIG_PATH",
                       help="experiment config file (searched under configs/ too)")
    run_p.add_argument("-d", "--dataset", dest="dataset_name", metavar="DATASET_NAME",
                       help="dataset override; custom datasets live under the data root")
    run_p.add_argument("-train", "--train", dest="train_flag", type=_parse_bool,
                       default=None, metavar="BOOL", help="override train.enabled (True/False)")
    run_p.add_argument("--results-dir", default="results", help="output root (default results)")
    run_p.add_argument("--data-dir", default=None,
                       help="custom dataset root (default $PULSEKIT_DATA_DIR or ./data)")

    viz_p = sub.add_parser("visualize", help="render saved results for one sample to SVG")
    viz_p.add_argument("--task", required=True, help="experiment name to read results for")
    viz_p.add_argument("--models", required=True, help="comma-separated model names")
    viz_p.add_argument("--sample-index", type=int, default=0)
    viz_p.add_argument("--x-range", type=int, default=None,
                       help="timesteps to render (clipped to the window)")
    viz_p.add_argument("--save-path", required=True, help="output .svg path")
    viz_p.add_argument("--miss-type", default=None, help="expected missingness type (checked)")
    viz_p.add_argument("--miss-percent", type=float, default=None,
                       help="expected missing fraction (checked)")
    viz_p.add_argument("--results-dir", default="results")
    return parser


def _cmd_run(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.config_path is None and args.dataset_name is None:
        parser.error("one of -c/--config or -d/--dataset is required")
    if args.config_path is not None:
        config = load_config(resolve_config_path(args.config_path))
    else:
        config = default_config_for_dataset(args.dataset_name, data_root=args.data_dir)
    overrides = CliOverrides(dataset_name=args.dataset_name, train_flag=args.train_flag)
    config = merge_overrides(config, overrides, data_root=args.data_dir)
    outcome = run_experiment(config, output_root=args.results_dir)
    report = outcome.report
    print(
        f"{report.experiment_name}/{report.model_name}: "
        f"n={report.n_samples} mse={report.aggregate_mse:.6g} mae={report.aggregate_mae:.6g}"
    )
    print(f"wrote {outcome.bundle_path.parent}")
    return outcome.exit_code


def _cmd_visualize(args: argparse.Namespace) -> int:
    out = visualize_standalone(
        task=args.task,
        models=[m.strip() for m in args.models.split(",") if m.strip()],
        sample_index=args.sample_index,
        x_range=args.x_range,
        save_path=args.save_path,
        miss_type=args.miss_type,
        miss_percent=args.miss_percent,
        results_root=args.results_dir,
    )
    print(f"wrote {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args, parser)
        return _cmd_visualize(args)
    except PulsekitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # unexpected failure still exits cleanly
        print(f"internal error: {e!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
