"""pulsekit: a config-driven workbench for imputing missing regions in
quasi-periodic biosignals (ECG/PPG-like waveforms)."""

from .config import (
    CliOverrides,
    DataConfig,
    ExperimentConfig,
    ModelConfig,
    TrainConfig,
    Violation,
    config_digest,
    load_config,
    merge_overrides,
    parse_config,
    serialize_config,
    validate,
    validate_document,
)
from .dataset import (
    Sample,
    SignalSet,
    SyntheticParams,
    generate_synthetic,
    load_dataset,
    normalize_zscore,
    save_raw_f32,
    split,
    window,
)
from .evaluation import EvaluationReport, SampleScore, aggregate, mae_missing, mse_missing
from .imputers import (
    FftImputer,
    FittedState,
    ImputationResult,
    Imputer,
    LinearInterpImputer,
    MeanFillImputer,
    available_imputers,
    create_imputer,
    impute_batch,
    register_function_imputer,
    register_imputer,
    registry_lookup,
)
from .missingness import (
    Mask,
    MaskedSample,
    MissingnessSpec,
    apply_extended,
    apply_mcar_points,
    apply_missingness,
    apply_pattern,
    apply_transient,
    available_mechanisms,
    dispatch,
    min_observed_guard,
    register_mechanism,
)
from .runner import (
    RunOutcome,
    default_config_for_dataset,
    export_bundle,
    run_experiment,
    visualize_standalone,
    write_bundle,
)

__version__ = "0.1.0"
