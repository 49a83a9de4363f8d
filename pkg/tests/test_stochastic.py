import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lctjitter.exceptions import ConfigError, InputError
from lctjitter.lct import FrequencyGrid, LctParams, SampledSignal, TimeGrid, chirp_modulate, lct_filter
from lctjitter.stochastic import (
    NOISE,
    JitterModel,
    JointJitter,
    RandomProcessSpec,
    SpectralDensity,
    analytic_lct_psd,
    autocorrelation,
    bandwidth_check,
    char_fn,
    fourier_psd,
    joint_char_fn,
    lct_autocorrelation,
    lct_cross_psd,
    lct_psd,
    realize,
    tone_phase,
)

GRID = TimeGrid.span(-4.0, 4.0, 0.01)

jitter_st = st.one_of(
    st.just(JitterModel()),
    st.floats(1e-4, 0.05).map(JitterModel.uniform),
    st.floats(1e-3, 0.04).map(lambda a: JitterModel("discrete", points=(-a, 0.0, a), weights=(0.25, 0.5, 0.25))),
)


# -- processes --------------------------------------------------------------

def test_tone_has_unit_modulus(tone):
    for trial in range(5):
        np.testing.assert_allclose(np.abs(realize(tone, GRID, trial).values), 1.0, atol=1e-14)


def test_realization_is_deterministic(tone, noise):
    for spec in (tone, noise):
        a = realize(spec, GRID, 3).values
        b = realize(spec, GRID, 3).values
        assert np.array_equal(a, b)
        assert not np.array_equal(a, realize(spec, GRID, 4).values)


def test_uniform_phase_tone_is_zero_mean(tone):
    mean = np.mean([np.exp(1j * tone_phase(tone, k)) for k in range(5000)])
    assert abs(mean) <= 0.05


def test_gaussian_phase_tone_mean_is_not_zero():
    spec = RandomProcessSpec.reference_tone(seed=2, phase_law="gaussian")
    mean = np.mean([np.exp(1j * tone_phase(spec, k)) for k in range(5000)])
    assert abs(mean - math.exp(-0.5)) <= 0.02


def test_noise_power_and_band_edge(noise):
    x = np.array([realize(noise, GRID, k).values for k in range(300)])
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, rel=0.03)
    with pytest.raises(ConfigError):
        realize(RandomProcessSpec(NOISE, band_edge=400.0, seed=0), GRID, 0)


def test_process_spec_validation():
    with pytest.raises(ConfigError):
        RandomProcessSpec("pink")
    with pytest.raises(ConfigError):
        RandomProcessSpec(NOISE, band_edge=0.0)
    with pytest.raises(ConfigError):
        RandomProcessSpec(phase_law="cauchy")


# -- correlation ------------------------------------------------------------

def test_lct_autocorrelation_of_tone(tone, ref_params):
    xs = [realize(tone, GRID, k) for k in range(200)]
    lags = np.arange(0, 41) * GRID.dt
    est = lct_autocorrelation(xs, ref_params, lags)
    assert abs(est.values[0] - 1) <= 1e-12
    want = np.exp(1j * 5 * math.pi * lags) * np.exp(-1j * ref_params.chirp_rate * lags ** 2)
    np.testing.assert_allclose(est.values, want, atol=0.02)


def test_chirp_corrected_identity(noise, ref_params):
    xs = [realize(noise, GRID, k) for k in range(20)]
    lags = np.arange(-30, 31) * GRID.dt
    lct = lct_autocorrelation(xs, ref_params, lags).values
    companions = [chirp_modulate(x, ref_params.chirp_rate) for x in xs]
    plain = autocorrelation(companions, lags).values
    np.testing.assert_allclose(lct, plain * np.exp(-1j * ref_params.chirp_rate * lags ** 2), atol=1e-10)


def test_autocorrelation_lag_zero_is_real_and_hermitian(noise):
    xs = [chirp_modulate(realize(noise, GRID, k), -noise.chirp_rate) for k in range(400)]
    lags = np.arange(-20, 21) * GRID.dt
    r = autocorrelation(xs, lags).values
    assert abs(r[20].imag) <= 1e-10 and r[20].real > 0
    np.testing.assert_allclose(r[::-1], np.conj(r), atol=0.03)


def test_companion_is_stationary_across_windows(noise):
    grid = TimeGrid(-10.24, 0.01, 2048)
    reals = [chirp_modulate(realize(noise, grid, k), -noise.chirp_rate) for k in range(1500)]
    lags = np.array([0.0, 0.02, 0.05])
    per_window = []
    for w in range(4):
        part = [r.window(w * 512, (w + 1) * 512) for r in reals]
        per_window.append(autocorrelation(part, lags).values)
    per_window = np.array(per_window)
    ref = per_window.mean(axis=0)
    assert np.max(np.abs(per_window - ref) / np.abs(ref)) < 0.03


def test_zero_signals_give_zero_correlation(ref_params):
    z = [SampledSignal.on(GRID, np.zeros(GRID.count)) for _ in range(3)]
    assert np.all(lct_autocorrelation(z, ref_params, [0.0, 0.1]).values == 0)


def test_correlation_input_errors(tone, ref_params):
    x = realize(tone, GRID, 0)
    other = realize(tone, TimeGrid.span(-3.0, 5.0, 0.01), 1)
    with pytest.raises(InputError):
        lct_autocorrelation([x, other], ref_params, [0.0])
    with pytest.raises(InputError):
        lct_autocorrelation([x, x], ref_params, [0.005])
    with pytest.raises(InputError):
        lct_autocorrelation([x, x], ref_params, [0.0], variant="B")


# -- spectral densities -----------------------------------------------------

def test_tone_psd_is_a_unit_line_at_five(tone, ref_params):
    xs = [realize(tone, GRID, k) for k in range(50)]
    fg = FrequencyGrid.dual(GRID, ref_params.b)
    psd = lct_psd(xs, ref_params, fg)
    assert abs(fg.u[np.argmax(psd.values)] - 5.0) <= fg.du
    assert psd.mass() == pytest.approx(1.0, rel=0.05)
    assert bandwidth_check(psd, 10.0, 0.99)
    assert not bandwidth_check(psd, 4.0, 0.99)


def test_psd_integral_matches_lag_zero(noise, ref_params):
    xs = [realize(noise, GRID, k) for k in range(200)]
    fg = FrequencyGrid.dual(GRID, ref_params.b)
    psd = lct_psd(xs, ref_params, fg)
    r0 = lct_autocorrelation(xs, ref_params, [0.0]).values[0].real
    assert psd.mass() == pytest.approx(r0, rel=1e-6)


def test_noise_psd_support_and_lemma(noise, ref_params):
    grid = TimeGrid(-10.24, 0.01, 2048)
    xs = [realize(noise, grid, k) for k in range(200)]
    fg = FrequencyGrid.dual(grid, ref_params.b)
    psd = lct_psd(xs, ref_params, fg)
    assert bandwidth_check(psd, 10.0 + 2 * fg.du, 0.999)
    companions = [chirp_modulate(x, ref_params.chirp_rate) for x in xs]
    fourier = fourier_psd(companions, FrequencyGrid.dual(grid, 1.0))
    assert bandwidth_check(fourier, (10.0 + 2 * fg.du) / ref_params.b, 0.999)
    # P^A(u) = P(u / b) / (2 pi b) on matching grids
    np.testing.assert_allclose(psd.values, fourier.values / (2 * math.pi * ref_params.b), rtol=1e-9)


def test_zero_signals_give_zero_psd(ref_params):
    z = [SampledSignal.on(GRID, np.zeros(GRID.count)) for _ in range(3)]
    psd = lct_psd(z, ref_params, FrequencyGrid.dual(GRID, ref_params.b))
    assert np.all(psd.values == 0)
    assert bandwidth_check(psd, 1.0)


def test_coarse_grid_is_rejected(tone, ref_params):
    xs = [realize(tone, GRID, k) for k in range(3)]
    with pytest.raises(ConfigError):
        lct_psd(xs, ref_params, FrequencyGrid(-10.0, 0.5, 41))


def test_negative_density_rejected():
    with pytest.raises(InputError):
        SpectralDensity(FrequencyGrid(-1.0, 1.0, 3), np.array([1.0, -0.5, 1.0]))
    with pytest.raises(InputError):
        bandwidth_check(SpectralDensity(FrequencyGrid(-1.0, 1.0, 3), np.ones(3)), 1.0, 0.0)


def test_filter_law(noise, ref_params):
    grid = TimeGrid(-20.48, 0.01, 4096)
    fg = FrequencyGrid.dual(grid, ref_params.b)
    h = (np.abs(fg.u) <= 5).astype(float)
    xs = [realize(noise, grid, k) for k in range(2000)]
    ys = [lct_filter(x, ref_params, h) for x in xs]
    band = np.abs(fg.u) <= 10
    want = h * h * analytic_lct_psd(noise, ref_params, fg).values
    got = lct_psd(ys, ref_params, fg).values
    assert np.linalg.norm((got - want)[band]) / np.linalg.norm(want[band]) <= 0.05
    pxx = lct_psd(xs, ref_params, fg).values
    cross = lct_cross_psd(ys, xs, ref_params, fg)
    assert np.linalg.norm((cross - h * pxx)[band]) / np.linalg.norm((h * pxx)[band]) <= 0.05


def test_analytic_psd_mass(noise, tone, ref_params):
    fg = FrequencyGrid.symmetric(12.0, 0.01)
    assert analytic_lct_psd(noise, ref_params, fg).mass() == pytest.approx(1.0, rel=1e-9)
    line = analytic_lct_psd(tone, ref_params, fg)
    assert line.lines == ((pytest.approx(5.0), 1.0),)
    with pytest.raises(ConfigError):
        analytic_lct_psd(tone, LctParams.fourier(), fg)


# -- characteristic functions ------------------------------------------------

def test_uniform_char_fn_closed_form():
    m = JitterModel.uniform(0.01)
    assert char_fn(m, 0.0) == 1
    assert char_fn(m, 5 * math.pi).real == pytest.approx(math.sin(0.05 * math.pi) / (0.05 * math.pi), abs=1e-15)
    assert char_fn(m, 5 * math.pi).real == pytest.approx(0.995893, abs=1e-6)
    u = np.linspace(-300, 300, 101)
    np.testing.assert_allclose(char_fn(JitterModel(), u), 1.0)


@given(jitter_st, st.floats(-1e4, 1e4))
def test_char_fn_bounds_and_symmetry(model, u):
    phi = char_fn(model, u)
    assert abs(phi) <= 1 + 1e-12
    assert char_fn(model, -u) == pytest.approx(np.conj(phi), abs=1e-12)
    assert char_fn(model, 0.0) == pytest.approx(1.0)


@given(jitter_st, st.floats(-500, 500), st.floats(-500, 500))
def test_joint_char_fn_couplings(model, u, v):
    assert joint_char_fn(JointJitter(model, "zeta-zero"), u, v) == pytest.approx(char_fn(model, u))
    assert joint_char_fn(JointJitter(model, "equal-to-xi"), u, -u) == pytest.approx(1.0)
    iid = joint_char_fn(JointJitter(model, "iid-independent"), u, v)
    assert iid == pytest.approx(char_fn(model, u) * char_fn(model, v))
    for c in ("zeta-zero", "equal-to-xi", "iid-independent"):
        assert joint_char_fn(JointJitter(model, c), 0.0, 0.0) == pytest.approx(1.0)


def test_char_fn_matches_sample_average(rng):
    m = JitterModel.uniform(0.03)
    draws = m.draw(rng, 200_000)
    for u in (10.0, 50.0, 100.0):
        assert np.mean(np.exp(1j * u * draws)) == pytest.approx(char_fn(m, u), abs=5e-3)


def test_jitter_model_validation():
    with pytest.raises(ConfigError):
        JitterModel("gamma")
    with pytest.raises(ConfigError):
        JitterModel.uniform(0.0)
    with pytest.raises(ConfigError):
        JitterModel("discrete", points=(0.0, 0.01), weights=(0.5, 0.5))
    with pytest.raises(ConfigError):
        JointJitter(JitterModel(), "shifted")
