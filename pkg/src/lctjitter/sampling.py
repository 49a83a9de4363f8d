"""Jitter sampling t_n = nT + xi_n and its equivalent uniform-sampling system."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DomainError, InputError
from .lct import FrequencyGrid, LctParams, TimeGrid
from .stochastic import (
    NOISE,
    STREAM_XI,
    JitterModel,
    RandomProcessSpec,
    SpectralDensity,
    char_fn,
    evaluate_tone,
    noise_companion,
    trial_rng,
)

INTERP_HALF_WIDTH = 64


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    """Sampling instants t_n = n T + offsets_n for n = n_lo .. n_hi."""

    T: float
    n_lo: int
    n_hi: int
    offsets: np.ndarray = field(repr=False)

    def __post_init__(self):
        offsets = np.array(self.offsets, dtype=np.float64, copy=True).reshape(-1)
        if offsets.shape[0] != self.n_hi - self.n_lo + 1:
            raise InputError("one offset per index is required")
        if offsets.size and np.max(np.abs(offsets)) >= self.T / 2:
            raise ConfigError("sampling offsets must lie strictly inside (-T/2, T/2)")
        offsets.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.n_lo, self.n_hi + 1)

    @property
    def nominal(self) -> np.ndarray:
        return self.n * self.T

    @property
    def instants(self) -> np.ndarray:
        return self.nominal + self.offsets

    def __len__(self):
        return self.offsets.shape[0]


def n_range_covering(start: float, stop: float, T: float) -> tuple[int, int]:
    """Smallest index range whose nominal instants nT cover [start, stop]."""
    return int(math.floor(start / T + 1e-9)), int(math.ceil(stop / T - 1e-9))


def draw_plan(T: float, n_range: tuple[int, int], jitter: JitterModel, seed: int, trial: int) -> SamplingPlan:
    """Draw i.i.d. offsets from ``jitter`` for every index in ``n_range`` (inclusive)."""
    if not T > 0:
        raise ConfigError(f"sampling interval must be positive, got {T}")
    if jitter.support_radius >= T / 2:
        raise ConfigError(f"jitter support {jitter.support_radius} must be below T/2 = {T / 2}")
    n_lo, n_hi = int(n_range[0]), int(n_range[1])
    if n_hi < n_lo:
        raise ConfigError("empty index range")
    offsets = jitter.draw(trial_rng(seed, trial, STREAM_XI), n_hi - n_lo + 1)
    return SamplingPlan(float(T), n_lo, n_hi, offsets)


def interpolate_periodic(values: np.ndarray, grid: TimeGrid, t, half_width: int = INTERP_HALF_WIDTH) -> np.ndarray:
    """Truncated sinc interpolation of a record treated as one period of a periodic signal."""
    t = np.asarray(t, dtype=np.float64)
    n = grid.count
    pos = (t - grid.t0) / grid.dt
    base = np.floor(pos).astype(np.int64)
    taps = np.arange(-half_width + 1, half_width + 1)
    idx = base[:, None] + taps[None, :]
    kern = np.sinc(pos[:, None] - idx)
    return (kern * values[np.mod(idx, n)]).sum(axis=1)


def sample_at(process: RandomProcessSpec, plan: SamplingPlan, trial: int, grid: TimeGrid | None = None) -> np.ndarray:
    """x(t_n) for one realization: exact for the tone, sinc-interpolated for noise.

    The noise process is realized on ``grid`` and its stationary companion is
    interpolated (the chirped process itself is not Fourier bandlimited).
    """
    t = plan.instants
    if process.kind != NOISE:
        return evaluate_tone(process, t, trial)
    if grid is None:
        raise InputError("noise process sampling needs the realization grid")
    if t.size and (t[0] < grid.t0 or t[-1] > grid.stop):
        raise DomainError("sampling instants fall outside the realization grid")
    companion = noise_companion(process, grid, trial)
    return interpolate_periodic(companion, grid, t) * np.exp(1j * process.chirp_rate * t * t)


def companion_samples(samples: np.ndarray, plan: SamplingPlan, params: LctParams) -> np.ndarray:
    """x~(t_n) = x(t_n) e^{j a t_n^2 / 2b}."""
    t = plan.instants
    return np.asarray(samples) * np.exp(1j * params.chirp_rate * t * t)


@dataclass(frozen=True, eq=False)
class EquivalentSystem:
    """Pre-filter H1(u) = phi_xi(u/b) plus additive noise with PSD P(u)(1 - |H1|^2)."""

    jitter: JitterModel
    params: LctParams
    grid: FrequencyGrid
    h1_values: np.ndarray = field(repr=False)
    noise_psd: SpectralDensity = field(repr=False)

    def h1(self, u):
        return char_fn(self.jitter, np.asarray(u, dtype=np.float64) / self.params.b)


def equivalent_system(jitter: JitterModel, params: LctParams, psd: SpectralDensity) -> EquivalentSystem:
    u = psd.grid.u
    h1 = char_fn(jitter, u / params.b)
    gain = 1.0 - np.abs(h1) ** 2
    lines = tuple((loc, mass * (1.0 - abs(char_fn(jitter, loc / params.b)) ** 2)) for loc, mass in psd.lines)
    noise = SpectralDensity(psd.grid, psd.values * gain, "lct", lines)
    return EquivalentSystem(jitter, params, psd.grid, h1, noise)


def equivalence_theory(psd: SpectralDensity, jitter: JitterModel, params: LctParams, T: float, k: int) -> complex:
    """Autocorrelation of x~(t_n) at lag k predicted by the equivalent system."""
    b = params.b
    if k == 0:
        return complex(psd.integrate())
    return complex(psd.integrate(lambda u: np.abs(char_fn(jitter, u / b)) ** 2 * np.exp(1j * u * k * T / b)))


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    lags: np.ndarray
    monte_carlo: np.ndarray
    theory: np.ndarray
    trials: int

    @property
    def deviation(self) -> np.ndarray:
        """|mc - theory| / |theory| per lag."""
        return np.abs(self.monte_carlo - self.theory) / np.maximum(np.abs(self.theory), 1e-12)

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviation))


def verify_equivalence(process: RandomProcessSpec, jitter: JitterModel, params: LctParams, T: float,
                       lags, trials: int, psd: SpectralDensity, n_range: tuple[int, int] = (-40, 40),
                       seed: int = 0, grid: TimeGrid | None = None) -> EquivalenceReport:
    """Monte Carlo autocorrelation of the chirped nonuniform samples against the equivalent system.

    Sample pairs (n, n - k) are averaged over all admissible n and all trials.
    """
    if trials < 100:
        raise ConfigError("equivalence check needs at least 100 trials")
    lags = np.atleast_1d(np.asarray(lags, dtype=np.int64))
    n_len = n_range[1] - n_range[0] + 1
    if np.any(np.abs(lags) >= n_len):
        raise ConfigError("lag exceeds the sampled index range")
    acc = np.zeros(lags.shape[0], dtype=np.complex128)
    for trial in range(trials):
        plan = draw_plan(T, n_range, jitter, seed, trial)
        z = companion_samples(sample_at(process, plan, trial, grid), plan, params)
        for i, k in enumerate(lags):
            if k >= 0:
                acc[i] += np.mean(z[k:] * np.conj(z[:n_len - k]))
            else:
                acc[i] += np.mean(z[:n_len + k] * np.conj(z[-k:]))
    theory = np.array([equivalence_theory(psd, jitter, params, T, int(k)) for k in lags])
    return EquivalenceReport(lags, acc / trials, theory, trials)

