"""Random processes, correlation / PSD estimators and jitter distributions.

All randomness is drawn from ``numpy.random.Generator`` instances keyed on
``(seed, trial, stream)`` so every realization can be regenerated on its own,
independently of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import ConfigError, InputError
from .lct import FrequencyGrid, LctParams, SampledSignal, TimeGrid, dft_on_grid

TONE = "random-phase-tone"
NOISE = "filtered-noise"
PROCESS_KINDS = (TONE, NOISE)
PHASE_LAWS = ("uniform", "gaussian")

# independent random streams per trial
STREAM_PHASE = 0
STREAM_NOISE = 1
STREAM_XI = 2
STREAM_ZETA = 3

PSD_FLOOR = 1e-9

trapezoid = getattr(np, "trapezoid", None) or np.trapz


def trial_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=(int(trial), int(stream)))
    return np.random.default_rng(ss)


# ---------------------------------------------------------------------------
# random processes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomProcessSpec:
    """Law of a chirped random process x(t) = x~(t) e^{j chirp_rate t^2}.

    ``random-phase-tone``: x~(t) = amplitude * e^{j(tone_frequency t + psi)}.
    ``filtered-noise``: x~ is complex white noise ideally low-passed to
    |omega| <= band_edge, normalised to E|x|^2 = amplitude^2.
    """

    kind: str = TONE
    tone_frequency: float = 0.0
    chirp_rate: float = 0.0
    band_edge: float = 0.0
    seed: int = 0
    phase_law: str = "uniform"
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise ConfigError(f"unknown process kind {self.kind!r}")
        if self.phase_law not in PHASE_LAWS:
            raise ConfigError(f"unknown phase law {self.phase_law!r}")
        if self.kind == NOISE and not self.band_edge > 0:
            raise ConfigError("filtered-noise process needs a positive band_edge")

    @classmethod
    def reference_tone(cls, seed: int = 0, phase_law: str = "uniform") -> "RandomProcessSpec":
        """x(t) = e^{j 5 pi t + j psi - j (3/2) pi t^2}."""
        return cls(TONE, tone_frequency=5 * math.pi, chirp_rate=-1.5 * math.pi,
                   seed=seed, phase_law=phase_law)

    @property
    def power(self) -> float:
        return self.amplitude ** 2


def tone_phase(spec: RandomProcessSpec, trial: int) -> float:
    rng = trial_rng(spec.seed, trial, STREAM_PHASE)
    if spec.phase_law == "gaussian":
        return float(rng.standard_normal())
    return float(rng.uniform(0.0, 2.0 * math.pi))


def evaluate_tone(spec: RandomProcessSpec, t, trial: int) -> np.ndarray:
    """Closed-form value of a tone realization at arbitrary instants."""
    if spec.kind != TONE:
        raise InputError("closed-form evaluation is only available for the tone process")
    t = np.asarray(t, dtype=np.float64)
    psi = tone_phase(spec, trial)
    return spec.amplitude * np.exp(1j * (spec.tone_frequency * t + psi + spec.chirp_rate * t * t))


def noise_companion(spec: RandomProcessSpec, grid: TimeGrid, trial: int) -> np.ndarray:
    """The stationary (unchirped) part x~ of a filtered-noise realization on ``grid``."""
    n = grid.count
    nyquist = math.pi / grid.dt
    if spec.band_edge > nyquist * (1 + 1e-12):
        raise ConfigError(f"band_edge {spec.band_edge} exceeds grid Nyquist {nyquist}")
    omega = 2.0 * math.pi * np.fft.fftfreq(n, d=grid.dt)
    mask = np.abs(omega) <= spec.band_edge * (1 + 1e-12)
    kept = int(mask.sum())
    if kept == 0:
        raise ConfigError("band_edge is narrower than one frequency bin of the grid")
    rng = trial_rng(spec.seed, trial, STREAM_NOISE)
    white = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
    filtered = np.fft.ifft(np.fft.fft(white) * mask)
    return spec.amplitude * filtered * math.sqrt(n / kept)


def realize(spec: RandomProcessSpec, grid: TimeGrid, trial: int) -> SampledSignal:
    """One realization of the process on ``grid``, deterministic in (seed, trial)."""
    t = grid.t
    if spec.kind == TONE:
        return SampledSignal.on(grid, evaluate_tone(spec, t, trial))
    values = noise_companion(spec, grid, trial) * np.exp(1j * spec.chirp_rate * t * t)
    return SampledSignal.on(grid, values)


# ---------------------------------------------------------------------------
# correlation estimators
# ---------------------------------------------------------------------------

CORRELATION_VARIANTS = ("R", "A", "A2")


@dataclass(frozen=True, eq=False)
class CorrelationEstimate:
    lags: np.ndarray
    values: np.ndarray
    variant: str


def _stack(realizations: Sequence[SampledSignal]) -> tuple[np.ndarray, SampledSignal]:
    realizations = list(realizations)
    if not realizations:
        raise InputError("no realizations given")
    ref = realizations[0]
    for r in realizations[1:]:
        if len(r) != len(ref) or abs(r.t0 - ref.t0) > 1e-12 * max(1.0, abs(ref.t0)) or r.dt != ref.dt:
            raise InputError("realizations must share a common time grid")
    return np.vstack([r.values for r in realizations]), ref


def _lag_steps(lags, dt: float, n: int) -> np.ndarray:
    lags = np.atleast_1d(np.asarray(lags, dtype=np.float64))
    steps = np.rint(lags / dt).astype(np.int64)
    if np.any(np.abs(steps * dt - lags) > 1e-9 * dt + 1e-12 * np.abs(lags)):
        raise InputError("lags must be integer multiples of the grid step")
    if np.any(np.abs(steps) >= n):
        raise InputError("lag exceeds the record length")
    return steps


def lct_autocorrelation(realizations: Sequence[SampledSignal], params: LctParams | None,
                        lags, variant: str = "A") -> CorrelationEstimate:
    """Ensemble and time average of x(t2 + tau) x*(t2) times the LCT phase factor.

    ``variant`` "R" is the plain autocorrelation, "A" uses e^{j (a/b) t2 tau}
    and "A2" uses e^{j (a/b) t1 tau} with t1 = t2 + tau.
    """
    if variant not in CORRELATION_VARIANTS:
        raise InputError(f"unknown correlation variant {variant!r}")
    if variant != "R" and params is None:
        raise InputError("LCT correlation variants need parameters")
    if len(realizations) < 2 and variant != "R":
        raise InputError("need at least two realizations")
    data, ref = _stack(realizations)
    n = data.shape[1]
    steps = _lag_steps(lags, ref.dt, n)
    t = ref.t
    ratio = 0.0 if params is None else params.a / params.b
    out = np.empty(steps.shape[0], dtype=np.complex128)
    for i, m in enumerate(steps):
        if m >= 0:
            prod = data[:, m:] * np.conj(data[:, :n - m])
            t2 = t[:n - m]
        else:
            prod = data[:, :n + m] * np.conj(data[:, -m:])
            t2 = t[-m:]
        tau = m * ref.dt
        if variant == "A":
            prod = prod * np.exp(1j * ratio * t2 * tau)
        elif variant == "A2":
            prod = prod * np.exp(1j * ratio * (t2 + tau) * tau)
        out[i] = prod.mean()
    return CorrelationEstimate(steps * ref.dt, out, variant)


def autocorrelation(realizations: Sequence[SampledSignal], lags) -> CorrelationEstimate:
    return lct_autocorrelation(realizations, None, lags, variant="R")


# ---------------------------------------------------------------------------
# spectral densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """Non-negative density on a frequency grid, plus optional point masses.

    ``lines`` holds (location, mass) pairs for spectral lines kept analytic;
    estimated densities carry line power spread over bins instead.
    """

    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)
    variant: str = "lct"
    lines: tuple = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if vals.shape[0] != self.grid.count:
            raise InputError("density values do not match grid size")
        if np.any(vals < -PSD_FLOOR * max(1.0, float(np.max(np.abs(vals), initial=0.0)))):
            raise InputError("spectral density has negative values")
        vals = np.clip(vals, 0.0, None)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "lines", tuple((float(u), float(m)) for u, m in self.lines))

    @property
    def u(self) -> np.ndarray:
        return self.grid.u

    def integrate(self, f=None, band: float | None = None) -> complex | float:
        """Integral of P(u) f(u) du (trapezoid on the grid, exact on lines)."""
        u = self.grid.u
        weight = np.ones_like(u) if f is None else np.asarray(f(u))
        dens = self.values * weight
        if band is not None:
            dens = np.where(np.abs(u) <= band, dens, 0.0)
        total = trapezoid(dens, dx=self.grid.du)
        for loc, mass in self.lines:
            if band is None or abs(loc) <= band:
                total = total + mass * (1.0 if f is None else np.asarray(f(np.array([loc])))[0])
        return total

    def mass(self, band: float | None = None) -> float:
        """Rectangle-rule mass (bin sums), optionally restricted to |u| <= band."""
        u = self.grid.u
        vals = self.values if band is None else np.where(np.abs(u) <= band * (1 + 1e-12), self.values, 0.0)
        total = float(vals.sum() * self.grid.du)
        for loc, m in self.lines:
            if band is None or abs(loc) <= band * (1 + 1e-12):
                total += m
        return total

    def scaled(self, factor) -> "SpectralDensity":
        """Density multiplied by ``factor`` (a scalar or one value per grid point)."""
        factor = np.broadcast_to(np.asarray(factor, dtype=np.float64), self.values.shape)
        return SpectralDensity(self.grid, self.values * factor, self.variant, self.lines)


def _check_grid_resolution(ref: SampledSignal, du: float, b: float):
    limit = 2.0 * math.pi * b / ref.duration if ref.duration > 0 else math.inf
    if du > limit * (1 + 1e-9):
        raise ConfigError(f"frequency grid too coarse: du={du} > 2*pi*b/duration={limit}")


def _periodograms(data: np.ndarray, ref: SampledSignal, w0: float, dw: float, m: int) -> np.ndarray:
    return np.vstack([dft_on_grid(ref.t0, ref.dt, row, w0, dw, m) for row in data]) * ref.dt


def fourier_psd(realizations: Sequence[SampledSignal], grid: FrequencyGrid) -> SpectralDensity:
    """Averaged periodogram |int x e^{-j w t} dt|^2 / (N dt) on an omega grid."""
    data, ref = _stack(realizations)
    _check_grid_resolution(ref, grid.du, 1.0)
    spectra = _periodograms(data, ref, grid.u0, grid.du, grid.count)
    dens = np.mean(np.abs(spectra) ** 2, axis=0) / (len(ref) * ref.dt)
    return SpectralDensity(grid, dens, "fourier")


def _chirped(data: np.ndarray, ref: SampledSignal, params: LctParams) -> np.ndarray:
    t = ref.t
    return data * np.exp(1j * params.chirp_rate * t * t)[None, :]


def lct_psd(realizations: Sequence[SampledSignal], params: LctParams, grid: FrequencyGrid) -> SpectralDensity:
    """LCT auto-PSD: periodogram of the chirped realizations, P^A(u) = P(u/b) / (2 pi b)."""
    data, ref = _stack(realizations)
    _check_grid_resolution(ref, grid.du, params.b)
    spectra = _periodograms(_chirped(data, ref, params), ref, grid.u0 / params.b, grid.du / params.b, grid.count)
    dens = np.mean(np.abs(spectra) ** 2, axis=0) / (len(ref) * ref.dt)
    return SpectralDensity(grid, dens / (2.0 * math.pi * params.b), "lct")


def lct_cross_psd(ys: Sequence[SampledSignal], xs: Sequence[SampledSignal], params: LctParams,
                  grid: FrequencyGrid) -> np.ndarray:
    """Complex LCT cross-PSD estimate P_yx^A on ``grid`` (averaged cross-periodogram)."""
    ydata, yref = _stack(ys)
    xdata, xref = _stack(xs)
    if ydata.shape != xdata.shape or yref.dt != xref.dt or yref.t0 != xref.t0:
        raise InputError("cross PSD needs paired realizations on one grid")
    _check_grid_resolution(xref, grid.du, params.b)
    w0, dw = grid.u0 / params.b, grid.du / params.b
    ys_ = _periodograms(_chirped(ydata, yref, params), yref, w0, dw, grid.count)
    xs_ = _periodograms(_chirped(xdata, xref, params), xref, w0, dw, grid.count)
    cross = np.mean(ys_ * np.conj(xs_), axis=0) / (len(xref) * xref.dt)
    return cross / (2.0 * math.pi * params.b)


def analytic_lct_psd(spec: RandomProcessSpec, params: LctParams, grid: FrequencyGrid) -> SpectralDensity:
    """Exact LCT PSD of a process whose chirp cancels the LCT chirp (x~ stationary)."""
    if abs(spec.chirp_rate + params.chirp_rate) > 1e-9 * max(1.0, abs(params.chirp_rate)):
        raise ConfigError("process chirp rate must equal -a/(2b) for a stationary companion")
    if spec.kind == TONE:
        if spec.amplitude == 0:
            return SpectralDensity(grid, np.zeros(grid.count), "lct")
        return SpectralDensity(grid, np.zeros(grid.count), "lct",
                               lines=((params.b * spec.tone_frequency, spec.power),))
    edge = params.b * spec.band_edge
    u = grid.u
    # fraction of each grid cell covered by [-edge, edge] keeps the mass exact
    cover = np.clip((edge - np.abs(u)) / grid.du + 0.5, 0.0, 1.0)
    return SpectralDensity(grid, spec.power / (2.0 * edge) * cover, "lct")


def bandwidth_check(psd: SpectralDensity, u_r: float, mass_fraction: float = 0.99) -> bool:
    """True when at least ``mass_fraction`` of the spectral mass lies in |u| <= u_r."""
    if not 0 < mass_fraction <= 1:
        raise InputError(f"mass_fraction must lie in (0, 1], got {mass_fraction}")
    total = psd.mass()
    if total <= 0:
        return True
    return psd.mass(band=u_r) >= mass_fraction * total * (1 - 1e-12)


# ---------------------------------------------------------------------------
# jitter distributions and characteristic functions
# ---------------------------------------------------------------------------

JITTER_FAMILIES = ("none", "uniform", "discrete")
COUPLINGS = ("zeta-zero", "iid-independent", "equal-to-xi")


@dataclass(frozen=True)
class JitterModel:
    """Zero-mean bounded perturbation law: none, uniform(+-half_width) or discrete."""

    family: str = "none"
    half_width: float = 0.0
    points: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        if self.family not in JITTER_FAMILIES:
            raise ConfigError(f"unknown jitter family {self.family!r}")
        if self.family == "uniform" and not self.half_width > 0:
            raise ConfigError("uniform jitter needs a positive half_width")
        if self.family == "discrete":
            pts = tuple(float(p) for p in self.points)
            wts = tuple(float(w) for w in self.weights) or tuple(1.0 / len(pts) for _ in pts)
            if not pts or len(pts) != len(wts):
                raise ConfigError("discrete jitter needs matching points and weights")
            if any(w < 0 for w in wts) or abs(sum(wts) - 1.0) > 1e-12:
                raise ConfigError("discrete jitter weights must be a probability vector")
            mean = sum(p * w for p, w in zip(pts, wts))
            if abs(mean) > 1e-12 * max(abs(p) for p in pts):
                raise ConfigError(f"discrete jitter must have zero mean, got {mean}")
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "weights", wts)

    @classmethod
    def uniform(cls, half_width: float) -> "JitterModel":
        return cls("uniform", half_width=float(half_width))

    @property
    def support_radius(self) -> float:
        if self.family == "uniform":
            return self.half_width
        if self.family == "discrete":
            return max(abs(p) for p in self.points)
        return 0.0

    @property
    def variance(self) -> float:
        if self.family == "uniform":
            return self.half_width ** 2 / 3.0
        if self.family == "discrete":
            return sum(w * p * p for p, w in zip(self.points, self.weights))
        return 0.0

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.family == "uniform":
            return rng.uniform(-self.half_width, self.half_width, size=n)
        if self.family == "discrete":
            return rng.choice(np.asarray(self.points), size=n, p=np.asarray(self.weights))
        return np.zeros(n)


def char_fn(model: JitterModel, u):
    """phi(u) = E[e^{j u xi}] in closed form; accepts scalars or arrays."""
    u_arr = np.asarray(u, dtype=np.float64)
    if model.family == "uniform":
        out = np.sinc(model.half_width * u_arr / math.pi).astype(np.complex128)
    elif model.family == "discrete":
        pts = np.asarray(model.points)
        wts = np.asarray(model.weights)
        out = np.exp(1j * u_arr[..., None] * pts) @ wts
    else:
        out = np.ones_like(u_arr, dtype=np.complex128)
    return complex(out) if np.ndim(u) == 0 else out


@dataclass(frozen=True)
class JointJitter:
    """Sampling offsets xi_n together with the reconstruction offsets zeta_n."""

    xi: JitterModel
    coupling: str = "zeta-zero"
    zeta: JitterModel | None = None

    def __post_init__(self):
        if self.coupling not in COUPLINGS:
            raise ConfigError(f"unknown coupling {self.coupling!r}")
        if self.coupling == "iid-independent" and self.zeta is None:
            object.__setattr__(self, "zeta", self.xi)

    @property
    def zeta_radius(self) -> float:
        if self.coupling == "zeta-zero":
            return 0.0
        if self.coupling == "equal-to-xi":
            return self.xi.support_radius
        return self.zeta.support_radius


def joint_char_fn(joint: JointJitter, u, v):
    """phi_{xi zeta}(u, v) = E[e^{j(u xi + v zeta)}]."""
    u_arr, v_arr = np.broadcast_arrays(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))
    if joint.coupling == "zeta-zero":
        out = char_fn(joint.xi, u_arr)
    elif joint.coupling == "equal-to-xi":
        out = char_fn(joint.xi, u_arr + v_arr)
    else:
        out = char_fn(joint.xi, u_arr) * char_fn(joint.zeta, v_arr)
    out = np.asarray(out, dtype=np.complex128)
    return complex(out) if np.ndim(u) == 0 and np.ndim(v) == 0 else out

