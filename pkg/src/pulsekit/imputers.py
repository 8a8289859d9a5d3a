"""Imputer interface, registry, and the three classical algorithms.

The base class handles the generic parts (parameter defaults, timing,
observed-value pass-through, result assembly); a new imputer only implements
the forward transform over one sample, mirroring how new models plug into the
registry. Channels are imputed independently. All imputers are deterministic
and preserve observed positions bit-exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dataset import Sample, SignalSet
from .errors import (
    BatchImputeError,
    ChannelFullyMissingError,
    EmptyDatasetError,
    InsufficientObservedError,
    InvalidValueError,
    MissingFitStateError,
    UnknownModelError,
)
from .missingness import MaskedSample

FFT_MIN_WINDOW = 8


@dataclass(frozen=True)
class FittedState:
    """State produced by fit(); empty for stateless imputers."""

    channel_means: np.ndarray | None = None

    @classmethod
    def empty(cls) -> "FittedState":
        return cls(channel_means=None)

    @property
    def is_empty(self) -> bool:
        return self.channel_means is None


@dataclass(frozen=True)
class ImputationResult:
    sample_id: str
    model_name: str
    imputed: Sample
    wall_time_s: float
    iterations: int | None = None
    converged: bool | None = None


def _check_positive_int(v) -> str | None:
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        return "must be a positive integer"
    return None


def _check_positive_real(v) -> str | None:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
        return "must be a positive number"
    return None


def _check_enum(*allowed: str) -> Callable[[object], str | None]:
    def check(v) -> str | None:
        if v not in allowed:
            return f"must be one of {sorted(allowed)}"
        return None

    return check


class Imputer:
    """Base imputer. Subclasses set ``name``/``params_schema`` and implement
    :meth:`impute_channel`."""

    name: str = "base"
    # param -> (default, checker); checker returns a reason string on failure
    params_schema: dict[str, tuple[object, Callable[[object], str | None]]] = {}

    def __init__(self, params: dict | None = None):
        params = dict(params or {})
        problems = check_params(type(self), params)
        if problems:
            key, reason = problems[0]
            raise InvalidValueError(f"params.{key}", reason)
        self.params = {k: params.get(k, default) for k, (default, _) in self.params_schema.items()}

    def fit(self, train_set: SignalSet) -> FittedState:
        """Default: stateless."""
        return FittedState.empty()

    def impute_channel(
        self, values: np.ndarray, missing: np.ndarray, channel: int, state: FittedState
    ) -> tuple[np.ndarray, dict]:
        """Forward pass for one channel; returns (full-length values, extras)."""
        raise NotImplementedError

    def impute(self, masked: MaskedSample, state: FittedState | None = None) -> ImputationResult:
        state = state or FittedState.empty()
        values = masked.observed.values
        missing = masked.mask.missing
        t0 = time.perf_counter()
        out = values.copy()  # observed positions pass through bit-exactly
        iterations: int | None = None
        converged: bool | None = None
        for c in range(out.shape[0]):
            filled, extras = self.impute_channel(values[c], missing[c], c, state)
            out[c, missing[c]] = filled[missing[c]]
            if "iterations" in extras:
                iterations = max(iterations or 0, extras["iterations"])
            if "converged" in extras:
                converged = extras["converged"] if converged is None else (converged and extras["converged"])
        wall = time.perf_counter() - t0
        return ImputationResult(
            sample_id=masked.observed.id,
            model_name=self.name,
            imputed=Sample(id=masked.observed.id, values=out),
            wall_time_s=wall,
            iterations=iterations,
            converged=converged,
        )


class MeanFillImputer(Imputer):
    """Fill missing positions with a per-channel mean.

    scope=sample uses the observed mean of the sample at hand; scope=train
    uses per-channel means fitted over the whole training split.
    """

    name = "mean_fill"
    params_schema = {"scope": ("sample", _check_enum("sample", "train"))}

    def fit(self, train_set: SignalSet) -> FittedState:
        if self.params["scope"] != "train":
            return FittedState.empty()
        if len(train_set) == 0:
            raise EmptyDatasetError("mean_fill scope=train requires a non-empty training set")
        stacked = np.stack([s.values for s in train_set])
        return FittedState(channel_means=stacked.mean(axis=(0, 2)))

    def impute_channel(self, values, missing, channel, state):
        if self.params["scope"] == "train":
            if state.is_empty:
                raise MissingFitStateError("mean_fill scope=train was not fitted")
            fill = float(state.channel_means[channel])
        else:
            observed = values[~missing]
            if observed.size == 0:
                raise ChannelFullyMissingError(channel)
            fill = float(observed.mean())
        out = values.copy()
        out[missing] = fill
        return out, {}


class LinearInterpImputer(Imputer):
    """Straight line between the observed neighbors of each missing run;
    leading/trailing runs hold the nearest observed value."""

    name = "linear_interp"
    params_schema = {"edge_mode": ("hold", _check_enum("hold"))}

    def impute_channel(self, values, missing, channel, state):
        observed_idx = np.flatnonzero(~missing)
        if observed_idx.size == 0:
            raise ChannelFullyMissingError(channel)
        if observed_idx.size < 2:
            raise InsufficientObservedError(channel, needed=2)
        out = values.copy()
        t = np.arange(len(values))
        out[missing] = np.interp(t[missing], observed_idx, values[observed_idx])
        return out, {}


def fourier_transform(x: np.ndarray) -> np.ndarray:
    """The discrete Fourier transform used by the fft imputer."""
    return np.fft.fft(x)


def inverse_fourier_transform(X: np.ndarray) -> np.ndarray:
    return np.fft.ifft(X)


def select_top_pairs(spectrum: np.ndarray, top_k: int) -> np.ndarray:
    """Boolean keep-mask over bins retaining the top_k conjugate pairs.

    A pair is identified by its representative bin in [0, T//2]; DC and (for
    even T) Nyquist are self-conjugate and count as one pair each. Equal
    magnitudes resolve to the lower bin index, so selection is deterministic.
    """
    T = len(spectrum)
    reps = np.arange(T // 2 + 1)
    mags = np.abs(spectrum[reps])
    order = np.lexsort((reps, -mags))  # by magnitude desc, then index asc
    keep = np.zeros(T, dtype=bool)
    for k in reps[order[:top_k]]:
        keep[k] = True
        keep[(T - k) % T] = True
    return keep


class FftImputer(Imputer):
    """Iterative sparse-spectrum projection.

    Initialize missing positions with the observed mean, then repeat: take the
    DFT, keep only the top_k conjugate pairs by magnitude, inverse-transform,
    and overwrite the missing positions with the reconstruction, until the
    largest update falls below tol or max_iters is reached.
    """

    name = "fft"
    params_schema = {
        "top_k": (10, _check_positive_int),
        "max_iters": (100, _check_positive_int),
        "tol": (1e-6, _check_positive_real),
    }

    def impute_channel(self, values, missing, channel, state):
        T = len(values)
        if T < FFT_MIN_WINDOW:
            raise InvalidValueError("window_length", f"fft imputer requires >= {FFT_MIN_WINDOW}")
        observed = values[~missing]
        if observed.size == 0:
            raise ChannelFullyMissingError(channel)
        top_k = self.params["top_k"]
        max_iters = self.params["max_iters"]
        tol = self.params["tol"]
        x = values.astype(np.float64).copy()
        x[missing] = observed.mean()
        converged = False
        iterations = 0
        for _ in range(max_iters):
            iterations += 1
            spectrum = fourier_transform(x)
            kept = np.where(select_top_pairs(spectrum, top_k), spectrum, 0.0)
            r = inverse_fourier_transform(kept).real
            delta = np.max(np.abs(r[missing] - x[missing])) if missing.any() else 0.0
            x[missing] = r[missing]
            if delta < tol:
                converged = True
                break
        return x, {"iterations": iterations, "converged": converged}


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, type[Imputer]] = {}


def register_imputer(cls: type[Imputer]) -> type[Imputer]:
    _REGISTRY[cls.name] = cls
    return cls


def register_function_imputer(
    name: str,
    impute_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    fit_fn: Callable[[SignalSet], FittedState] | None = None,
) -> type[Imputer]:
    """Register an imputer from a bare transform: fn(values, missing) -> values."""

    class _FunctionImputer(Imputer):
        def impute_channel(self, values, missing, channel, state):
            return impute_fn(values, missing), {}

        def fit(self, train_set):
            return fit_fn(train_set) if fit_fn else FittedState.empty()

    _FunctionImputer.name = name
    _FunctionImputer.__name__ = f"FunctionImputer_{name}"
    return register_imputer(_FunctionImputer)


def registry_lookup(name: str) -> type[Imputer]:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownModelError(name) from None


def available_imputers() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def create_imputer(name: str, params: dict | None = None) -> Imputer:
    return registry_lookup(name)(params)


def check_params(imputer_cls: type[Imputer], params: dict) -> list[tuple[str, str]]:
    """Validate a params map against an imputer's schema.

    Returns (key, reason) pairs; an unrecognized key reports the reason
    "unknown parameter".
    """
    problems = []
    for key, value in params.items():
        if key not in imputer_cls.params_schema:
            problems.append((key, "unknown parameter"))
            continue
        _, checker = imputer_cls.params_schema[key]
        reason = checker(value)
        if reason:
            problems.append((key, reason))
    return problems


register_imputer(MeanFillImputer)
register_imputer(LinearInterpImputer)
register_imputer(FftImputer)


# ---------------------------------------------------------------------------
# batch execution
# ---------------------------------------------------------------------------

def fit(imputer: Imputer, train_set: SignalSet) -> FittedState:
    return imputer.fit(train_set)


def impute_batch(
    imputer: Imputer,
    state: FittedState | None,
    masked_samples: Sequence[MaskedSample],
    batch_size: int = 32,
    partial: bool = False,
):
    """Impute a list of samples in batches; results keep input order.

    Batching is an execution detail only: outputs are identical for any
    batch_size. In strict mode the first failure raises a BatchImputeError
    naming the sample; with ``partial=True`` failures are collected and
    returned as (results, failures) without affecting other samples.
    """
    if batch_size < 1:
        raise InvalidValueError("batch_size", "must be >= 1")
    results: list[ImputationResult] = []
    failures: list[tuple[str, Exception]] = []
    for lo in range(0, len(masked_samples), batch_size):
        for masked in masked_samples[lo : lo + batch_size]:
            try:
                results.append(imputer.impute(masked, state))
            except Exception as e:  # tagged with the sample id
                if partial:
                    failures.append((masked.observed.id, e))
                else:
                    raise BatchImputeError(masked.observed.id, e) from e
    if partial:
        return results, failures
    return results
