import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fft_oracle import dft_direct, impute_spectral_bruteforce
from pulsekit.dataset import Sample, SignalSet
from pulsekit.errors import (
    BatchImputeError,
    ChannelFullyMissingError,
    EmptyDatasetError,
    InsufficientObservedError,
    InvalidValueError,
    MissingFitStateError,
    UnknownModelError,
)
from pulsekit.imputers import (
    FittedState,
    available_imputers,
    create_imputer,
    fourier_transform,
    impute_batch,
    register_function_imputer,
    registry_lookup,
    select_top_pairs,
)
from pulsekit.missingness import _mask_sample, apply_extended, apply_mcar_points


def masked_from(values, missing, sample_id="s0"):
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    missing = np.atleast_2d(np.asarray(missing, dtype=bool))
    return _mask_sample(Sample(id=sample_id, values=values), missing)


def one_channel_set(*rows):
    samples = tuple(
        Sample(id=f"s{i}", values=np.atleast_2d(np.asarray(r, dtype=float)))
        for i, r in enumerate(rows)
    )
    return SignalSet(samples=samples, sampling_rate_hz=1.0, channel_names=("ch0",))


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def test_registry_builtins():
    assert registry_lookup("linear_interp").name == "linear_interp"
    assert registry_lookup("mean_fill").name == "mean_fill"
    assert registry_lookup("fft").name == "fft"


def test_registry_unknown_model():
    with pytest.raises(UnknownModelError):
        registry_lookup("NAOMI")


def test_forward_pass_only_extension():
    def zero_fill(values, missing):
        out = values.copy()
        out[missing] = 0.0
        return out

    register_function_imputer("zero_fill_test", zero_fill)
    assert "zero_fill_test" in available_imputers()
    imp = create_imputer("zero_fill_test")
    masked = masked_from([1.0, 2.0, 3.0, 4.0], [False, True, True, False])
    result = imp.impute(masked)
    np.testing.assert_array_equal(result.imputed.values[0], [1.0, 0.0, 0.0, 4.0])


def test_unknown_param_rejected_at_construction():
    with pytest.raises(InvalidValueError):
        create_imputer("fft", {"alpha": 2})
    with pytest.raises(InvalidValueError):
        create_imputer("fft", {"top_k": 0})


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def test_fit_mean_train_scope():
    imp = create_imputer("mean_fill", {"scope": "train"})
    state = imp.fit(one_channel_set([2.0, 4.0, 6.0]))
    assert state.channel_means[0] == pytest.approx(4.0)


def test_fit_stateless_models_return_empty():
    sset = one_channel_set([1.0, 2.0, 3.0, 4.0])
    assert create_imputer("linear_interp").fit(sset).is_empty
    assert create_imputer("fft").fit(sset).is_empty
    assert create_imputer("mean_fill").fit(sset).is_empty  # scope=sample needs no fit


def test_fit_mean_train_scope_empty_set():
    empty = SignalSet(samples=(), sampling_rate_hz=1.0, channel_names=("ch0",))
    with pytest.raises(EmptyDatasetError):
        create_imputer("mean_fill", {"scope": "train"}).fit(empty)


# ---------------------------------------------------------------------------
# mean fill
# ---------------------------------------------------------------------------

def test_mean_fill_sample_scope_hand_example():
    masked = masked_from([2.0, 0.0, 4.0, 0.0], [False, True, False, True])
    out = create_imputer("mean_fill").impute(masked)
    np.testing.assert_array_equal(out.imputed.values[0], [2.0, 3.0, 4.0, 3.0])


def test_mean_fill_identity_on_empty_mask():
    vals = [1.5, -2.0, 7.25, 0.0]
    masked = masked_from(vals, [False] * 4)
    out = create_imputer("mean_fill").impute(masked)
    np.testing.assert_array_equal(out.imputed.values[0], vals)


def test_mean_fill_train_scope_uses_fitted_mean():
    imp = create_imputer("mean_fill", {"scope": "train"})
    state = FittedState(channel_means=np.array([4.0]))
    masked = masked_from([1.0, 0.0], [False, True])
    out = imp.impute(masked, state)
    np.testing.assert_array_equal(out.imputed.values[0], [1.0, 4.0])


def test_mean_fill_train_scope_without_fit():
    imp = create_imputer("mean_fill", {"scope": "train"})
    masked = masked_from([1.0, 0.0], [False, True])
    with pytest.raises(MissingFitStateError):
        imp.impute(masked)


def test_mean_fill_fully_missing_channel():
    masked = masked_from([0.0, 0.0], [True, True])
    with pytest.raises(ChannelFullyMissingError):
        create_imputer("mean_fill").impute(masked)


# ---------------------------------------------------------------------------
# linear interpolation
# ---------------------------------------------------------------------------

def test_linear_interior_gap_exact():
    masked = masked_from([1.0, 0.0, 0.0, 4.0], [False, True, True, False])
    out = create_imputer("linear_interp").impute(masked)
    np.testing.assert_array_equal(out.imputed.values[0], [1.0, 2.0, 3.0, 4.0])


def test_linear_edge_hold():
    masked = masked_from([0.0, 0.0, 5.0, 7.0], [True, True, False, False])
    out = create_imputer("linear_interp").impute(masked)
    np.testing.assert_array_equal(out.imputed.values[0], [5.0, 5.0, 5.0, 7.0])


def test_linear_identity_on_empty_mask():
    vals = [3.0, 1.0, 4.0, 1.0, 5.0]
    out = create_imputer("linear_interp").impute(masked_from(vals, [False] * 5))
    np.testing.assert_array_equal(out.imputed.values[0], vals)


def test_linear_insufficient_observed():
    masked = masked_from([1.0, 0.0, 0.0], [False, True, True])
    with pytest.raises(InsufficientObservedError):
        create_imputer("linear_interp").impute(masked)
    with pytest.raises(ChannelFullyMissingError):
        create_imputer("linear_interp").impute(masked_from([0.0, 0.0], [True, True]))


def test_linear_exact_on_affine_interior_gap():
    t = np.arange(1000, dtype=float)
    truth = 0.75 - 0.01 * t
    missing = np.zeros(1000, dtype=bool)
    missing[200:600] = True
    masked = masked_from(np.where(missing, 0.0, truth), missing)
    out = create_imputer("linear_interp").impute(masked)
    assert np.max(np.abs(out.imputed.values[0][missing] - truth[missing])) < 1e-12


# ---------------------------------------------------------------------------
# fft imputer
# ---------------------------------------------------------------------------

def test_select_top_pairs_counts_pairs_and_self_conjugates():
    T = 8
    x = np.sin(2 * np.pi * 1 * np.arange(T) / T)  # energy in bins 1 and 7
    keep = select_top_pairs(fourier_transform(x), top_k=1)
    assert keep[1] and keep[7]
    assert keep.sum() == 2  # one pair
    dc = np.ones(T)
    keep = select_top_pairs(fourier_transform(dc), top_k=1)
    assert keep[0] and keep.sum() >= 1  # DC is self-conjugate


def test_select_top_pairs_tie_breaks_low_index():
    spectrum = np.array([0.0, 2.0, 2.0, 0.0, 0.0, 2.0, 2.0], dtype=complex)  # T=7
    keep = select_top_pairs(spectrum, top_k=1)
    assert keep[1] and keep[6]
    assert not keep[2] and not keep[5]


def test_fft_pure_sinusoid_recovery():
    T = 256
    t = np.arange(T)
    truth = np.sin(2 * np.pi * 5 * t / T)
    missing = np.zeros(T, dtype=bool)
    missing[100:126] = True  # 10% extended gap
    masked = masked_from(np.where(missing, 0.0, truth), missing)
    out = create_imputer("fft", {"top_k": 4}).impute(masked)
    assert out.converged
    assert np.max(np.abs(out.imputed.values[0][missing] - truth[missing])) < 0.02


def test_fft_identity_on_empty_mask_one_iteration():
    vals = np.random.default_rng(0).normal(size=64)
    out = create_imputer("fft").impute(masked_from(vals, np.zeros(64, dtype=bool)))
    np.testing.assert_array_equal(out.imputed.values[0], vals)
    assert out.converged is True
    assert out.iterations == 1


def test_fft_constant_channel_dc_dominates():
    c = 3.25
    missing = np.zeros(64, dtype=bool)
    missing[10:30] = True
    masked = masked_from(np.where(missing, 0.0, np.full(64, c)), missing)
    out = create_imputer("fft", {"tol": 1e-9}).impute(masked)
    assert out.converged
    assert out.iterations == 1  # DFT of a constant is a pure DC bin
    np.testing.assert_allclose(out.imputed.values[0][missing], c, atol=1e-9)


def test_fft_matches_bruteforce_oracle():
    T = 256
    t = np.arange(T)
    truth = np.sin(2 * np.pi * 5 * t / T) + 0.5 * np.sin(2 * np.pi * 12 * t / T)
    missing = np.zeros(T, dtype=bool)
    missing[115:141] = True
    masked = masked_from(np.where(missing, 0.0, truth), missing)
    out = create_imputer("fft", {"top_k": 4, "tol": 1e-6}).impute(masked)
    oracle, oracle_iters, oracle_conv = impute_spectral_bruteforce(
        np.where(missing, 0.0, truth), missing, top_k=4, max_iters=100, tol=1e-6
    )
    assert out.converged and oracle_conv
    assert out.iterations == oracle_iters
    np.testing.assert_allclose(out.imputed.values[0], oracle, atol=1e-9)


def test_fft_realness_of_projected_inverse():
    rng = np.random.default_rng(7)
    for T in (64, 255, 256):
        x = rng.normal(size=T)
        spectrum = fourier_transform(x)
        kept = np.where(select_top_pairs(spectrum, 5), spectrum, 0.0)
        residue = np.max(np.abs(np.fft.ifft(kept).imag))
        assert residue < 1e-9


def test_fft_transform_matches_direct_dft():
    rng = np.random.default_rng(1)
    for T in (8, 64, 255, 256):
        x = rng.normal(size=T)
        np.testing.assert_allclose(fourier_transform(x), dft_direct(x), atol=1e-9)


def test_fft_terminates_on_noise():
    rng = np.random.default_rng(5)
    vals = rng.normal(size=128)
    missing = rng.random(128) < 0.3
    masked = masked_from(np.where(missing, 0.0, vals), missing)
    out = create_imputer("fft", {"max_iters": 20}).impute(masked)
    assert out.iterations <= 20
    assert np.isfinite(out.imputed.values).all()


def test_fft_window_too_short():
    masked = masked_from([1.0, 0.0, 1.0, 0.0], [False, True, False, True])
    with pytest.raises(InvalidValueError):
        create_imputer("fft").impute(masked)


# ---------------------------------------------------------------------------
# batching
# ---------------------------------------------------------------------------

def make_masked_batch(n=10, T=64, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        vals = rng.normal(size=(1, T))
        sample = Sample(id=f"s{i}", values=vals)
        out.append(apply_mcar_points(sample, 0.25, seed=seed + i))
    return out


def test_batch_size_invariance():
    batch = make_masked_batch()
    imp = create_imputer("fft", {"top_k": 3, "max_iters": 10})
    a = impute_batch(imp, None, batch, batch_size=1)
    b = impute_batch(imp, None, batch, batch_size=32)
    assert [r.sample_id for r in a] == [r.sample_id for r in b]
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.imputed.values, y.imputed.values)


def test_batch_empty_list():
    assert impute_batch(create_imputer("mean_fill"), None, [], batch_size=4) == []


def test_batch_error_tags_sample_id():
    batch = make_masked_batch(3)
    bad = masked_from(np.zeros(64), np.ones(64, dtype=bool), sample_id="broken")
    batch.insert(1, bad)
    imp = create_imputer("mean_fill")
    with pytest.raises(BatchImputeError) as exc:
        impute_batch(imp, None, batch, batch_size=2)
    assert exc.value.sample_id == "broken"
    results, failures = impute_batch(imp, None, batch, batch_size=2, partial=True)
    assert [r.sample_id for r in results] == ["s0", "s1", "s2"]
    assert [sid for sid, _ in failures] == ["broken"]


# ---------------------------------------------------------------------------
# cross-imputer properties
# ---------------------------------------------------------------------------

IMPUTER_FACTORIES = {
    "mean_fill": lambda: create_imputer("mean_fill"),
    "linear_interp": lambda: create_imputer("linear_interp"),
    "fft": lambda: create_imputer("fft", {"top_k": 4, "max_iters": 15}),
}


@settings(max_examples=40, deadline=None)
@given(
    name=st.sampled_from(sorted(IMPUTER_FACTORIES)),
    T=st.integers(min_value=16, max_value=256),
    percent=st.floats(min_value=0.05, max_value=0.5),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_observed_preservation_property(name, T, percent, seed):
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=(1, T))
    masked = apply_extended(Sample(id="p", values=vals), percent, seed=seed)
    if round(percent * T) < 1 or round(percent * T) > T - 2:
        return
    out = IMPUTER_FACTORIES[name]().impute(masked)
    obs = ~masked.mask.missing
    np.testing.assert_array_equal(out.imputed.values[obs], vals[obs])


@settings(max_examples=25, deadline=None)
@given(
    name=st.sampled_from(sorted(IMPUTER_FACTORIES)),
    T=st.integers(min_value=16, max_value=128),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_identity_on_all_false_masks_property(name, T, seed):
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=(1, T))
    masked = _mask_sample(Sample(id="p", values=vals), np.zeros((1, T), dtype=bool))
    out = IMPUTER_FACTORIES[name]().impute(masked)
    np.testing.assert_array_equal(out.imputed.values, vals)


def test_imputers_are_deterministic():
    batch = make_masked_batch(4)
    for name, factory in IMPUTER_FACTORIES.items():
        a = impute_batch(factory(), None, batch)
        b = impute_batch(factory(), None, batch)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.imputed.values, y.imputed.values)
