"""Exception types raised across the package.

Everything derives from :class:`PulsekitError` so callers can catch the whole
family at once (the CLI maps it to exit code 1).
"""


class PulsekitError(Exception):
    """Base class for all pulsekit errors."""


# --- configuration ---

class ConfigSyntaxError(PulsekitError):
    """The config document is not well-formed."""


class MissingSectionError(PulsekitError):
    def __init__(self, name: str):
        super().__init__(f"missing required section: {name}")
        self.name = name


class UnknownFieldError(PulsekitError):
    def __init__(self, path: str):
        super().__init__(f"unknown field: {path}")
        self.path = path


class InvalidValueError(PulsekitError, ValueError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class UnknownModelError(PulsekitError):
    def __init__(self, name: str):
        super().__init__(f"unknown model: {name!r}")
        self.name = name


class UnknownMissingnessError(PulsekitError):
    def __init__(self, name: str):
        super().__init__(f"unknown missingness mechanism: {name!r}")
        self.name = name


# --- datasets ---

class DatasetIOError(PulsekitError):
    def __init__(self, path, detail: str = ""):
        msg = f"cannot read dataset path: {path}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.path = path


class FormatError(PulsekitError):
    """Malformed dataset content (shape mismatch, bad cell, bad metadata)."""


class EmptyDatasetError(PulsekitError):
    """A dataset or score list that must be non-empty is empty."""


class DegenerateChannelError(PulsekitError):
    def __init__(self, channel: int):
        super().__init__(f"channel {channel} is constant; z-score undefined")
        self.channel = channel


# --- missingness ---

class PlacementFailureError(PulsekitError):
    """Transient gaps could not be placed without overlap."""


class ChannelFullyMissingError(PulsekitError):
    def __init__(self, channel: int):
        super().__init__(f"channel {channel} has fewer than the required observed points")
        self.channel = channel


# --- imputers ---

class InsufficientObservedError(PulsekitError):
    def __init__(self, channel: int, needed: int):
        super().__init__(f"channel {channel} needs >= {needed} observed points")
        self.channel = channel
        self.needed = needed


class MissingFitStateError(PulsekitError):
    """An imputer configured to use fitted state was run without fitting."""


class BatchImputeError(PulsekitError):
    def __init__(self, sample_id: str, cause: Exception):
        super().__init__(f"imputation failed for sample {sample_id!r}: {cause}")
        self.sample_id = sample_id
        self.cause = cause


# --- evaluation / export ---

class EmptyMaskError(PulsekitError):
    """No missing positions; a missing-region score is undefined."""


class AlignmentError(PulsekitError):
    """Sample ids disagree across model results."""


class MissingResultsError(PulsekitError):
    def __init__(self, model: str, path=None):
        msg = f"no results on disk for model {model!r}"
        if path is not None:
            msg += f" (looked in {path})"
        super().__init__(msg)
        self.model = model


class StageError(PulsekitError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
