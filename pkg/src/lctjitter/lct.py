"""Discrete linear canonical transform (b > 0 branch) and chirp helpers.

The forward transform is evaluated through the chirp / Fourier / chirp
factorisation

    L_A{f}(u) = sqrt(1/(j 2 pi b)) e^{j d u^2 / 2b} F{f(t) e^{j a t^2 / 2b}}(u / b)

with trapezoid quadrature on the uniform time grid.  When the frequency grid
is the DFT dual of the time grid the Fourier sum is done with an FFT, otherwise
with a direct sum (see ``_kernels``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .exceptions import InputError, ParameterError

UNIMODULAR_TOL = 1e-12
_DUAL_RTOL = 1e-9


@dataclass(frozen=True)
class LctParams:
    """Unimodular parameter matrix ((a, b), (c, d)) with b > 0."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = (self.a, self.b, self.c, self.d)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError(f"non-finite LCT parameters {vals}")
        if not self.b > 0:
            raise ParameterError(f"b must be strictly positive, got {self.b}")
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > UNIMODULAR_TOL:
            raise ParameterError(f"ad - bc = {det!r}, expected 1")

    @classmethod
    def fourier(cls) -> "LctParams":
        return cls(0.0, 1.0, -1.0, 0.0)

    @classmethod
    def fractional(cls, angle: float) -> "LctParams":
        """Fractional Fourier transform of the given angle (sin(angle) > 0)."""
        return cls(math.cos(angle), math.sin(angle), -math.sin(angle), math.cos(angle))

    @classmethod
    def reference(cls) -> "LctParams":
        """The matrix ((3, 1/pi), (pi, 2/3)) used in the simulation study."""
        return cls(3.0, 1.0 / math.pi, math.pi, 2.0 / 3.0)

    @property
    def chirp_rate(self) -> float:
        """a / (2b): x(t) e^{j rate t^2} is the Fourier-domain companion of x."""
        return self.a / (2.0 * self.b)

    @property
    def output_chirp_rate(self) -> float:
        return self.d / (2.0 * self.b)

    @property
    def amplitude(self) -> complex:
        # principal branch of sqrt(1/(j 2 pi b))
        return cmath.exp(-0.25j * math.pi) / math.sqrt(2.0 * math.pi * self.b)

    def nyquist_interval(self, u_r: float) -> float:
        """Largest uniform sampling interval pi*b/u_r for LCT bandwidth u_r."""
        if not u_r > 0:
            raise ParameterError(f"bandwidth must be positive, got {u_r}")
        return math.pi * self.b / u_r

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    dt: float
    count: int

    def __post_init__(self):
        if not self.dt > 0:
            raise InputError(f"dt must be positive, got {self.dt}")
        if self.count < 1:
            raise InputError("time grid must hold at least one point")

    @classmethod
    def span(cls, start: float, stop: float, step: float) -> "TimeGrid":
        """Grid from start to stop inclusive (stop is snapped to the step)."""
        n = int(round((stop - start) / step)) + 1
        return cls(float(start), float(step), n)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.count)

    @property
    def stop(self) -> float:
        return self.t0 + self.dt * (self.count - 1)


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Complex samples on a uniform time grid."""

    t0: float
    dt: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128, copy=True).reshape(-1)
        if vals.size == 0:
            raise InputError("signal has no samples")
        if not self.dt > 0:
            raise InputError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(vals)):
            raise InputError("signal contains non-finite samples")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))

    @classmethod
    def on(cls, grid: TimeGrid, values) -> "SampledSignal":
        sig = cls(grid.t0, grid.dt, values)
        if len(sig) != grid.count:
            raise InputError(f"expected {grid.count} samples, got {len(sig)}")
        return sig

    def __len__(self):
        return self.values.shape[0]

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.t0, self.dt, len(self))

    @property
    def duration(self) -> float:
        return (len(self) - 1) * self.dt

    def with_values(self, values) -> "SampledSignal":
        return SampledSignal(self.t0, self.dt, values)

    def window(self, start: int, stop: int) -> "SampledSignal":
        """Sub-record of samples [start, stop)."""
        return SampledSignal(self.t0 + start * self.dt, self.dt, self.values[start:stop])

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.dt)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid u0 + k*du, k = 0..count-1, in the LCT (or Fourier) variable."""

    u0: float
    du: float
    count: int

    def __post_init__(self):
        if not self.du > 0:
            raise InputError(f"du must be positive, got {self.du}")
        if self.count < 2:
            raise InputError("frequency grid needs at least two points")

    @classmethod
    def dual(cls, grid: TimeGrid | SampledSignal, b: float = 1.0) -> "FrequencyGrid":
        """The grid u = b * omega_k on the DFT frequencies of ``grid``, centred on 0."""
        n = len(grid) if isinstance(grid, SampledSignal) else grid.count
        du = 2.0 * math.pi * b / (n * grid.dt)
        return cls(-(n // 2) * du, du, n)

    @classmethod
    def symmetric(cls, u_max: float, du: float) -> "FrequencyGrid":
        n = int(round(u_max / du))
        return cls(-n * du, du, 2 * n + 1)

    @property
    def u(self) -> np.ndarray:
        return self.u0 + self.du * np.arange(self.count)

    def scaled(self, factor: float) -> "FrequencyGrid":
        return FrequencyGrid(self.u0 * factor, self.du * factor, self.count)


def _check_params(params) -> LctParams:
    if not isinstance(params, LctParams):
        raise ParameterError(f"expected LctParams, got {type(params).__name__}")
    return params


def trapezoid_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    if n > 1:
        w[0] = w[-1] = 0.5
    return w


def dft_on_grid(t0: float, dt: float, g: np.ndarray, w0: float, dw: float, m: int) -> np.ndarray:
    """sum_k g[k] exp(-j (w0 + i dw)(t0 + k dt)) for i = 0..m-1.

    Uses an FFT when (dw, m) is the DFT dual of (dt, len(g)), else the direct kernel.
    """
    g = np.asarray(g, dtype=np.complex128)
    n = g.shape[0]
    if m == n and abs(dw * dt * n - 2.0 * math.pi) <= _DUAL_RTOL * 2.0 * math.pi:
        k = np.arange(n)
        omega = w0 + dw * k
        return np.exp(-1j * omega * t0) * np.fft.fft(g * np.exp(-1j * w0 * dt * k))
    nodes = t0 + dt * np.arange(n)
    freqs = w0 + dw * np.arange(m)
    return _kernels.fourier_sum(nodes, g, freqs)


def chirp_modulate(signal: SampledSignal, rate: float, sign: int = 1) -> SampledSignal:
    """Multiply samples by exp(j * sign * rate * t^2)."""
    if sign not in (1, -1):
        raise InputError(f"sign must be +1 or -1, got {sign}")
    if rate == 0:
        return signal
    t = signal.t
    return signal.with_values(signal.values * np.exp(1j * sign * rate * t * t))


def fourier_transform(signal: SampledSignal, omega) -> np.ndarray:
    """Trapezoid evaluation of F(omega) = int f(t) e^{-j omega t} dt."""
    omega = np.asarray(omega, dtype=np.float64)
    g = signal.values * trapezoid_weights(len(signal))
    return _kernels.fourier_sum(signal.t, g, omega.reshape(-1)).reshape(omega.shape) * signal.dt


def lct_forward(signal: SampledSignal, params: LctParams, grid: FrequencyGrid) -> np.ndarray:
    """LCT of a sampled signal evaluated on ``grid``."""
    params = _check_params(params)
    if not isinstance(signal, SampledSignal):
        raise InputError("lct_forward expects a SampledSignal")
    n = len(signal)
    t = signal.t
    g = signal.values * trapezoid_weights(n) * np.exp(1j * params.chirp_rate * t * t)
    spectrum = dft_on_grid(signal.t0, signal.dt, g, grid.u0 / params.b, grid.du / params.b, grid.count)
    u = grid.u
    return params.amplitude * np.exp(1j * params.output_chirp_rate * u * u) * spectrum * signal.dt


def lct_inverse(spectrum, params: LctParams, grid: FrequencyGrid, out_grid: TimeGrid) -> SampledSignal:
    """Inverse LCT (kernel of A^-1 = conjugate kernel of A) onto ``out_grid``.

    The u integral uses the rectangle rule, which is the trapezoid rule for the
    periodic spectra produced on DFT-dual grids; on such grids this is the exact
    discrete inverse of ``lct_forward`` away from the two record endpoints.
    """
    params = _check_params(params)
    spectrum = np.asarray(spectrum, dtype=np.complex128).reshape(-1)
    if spectrum.shape[0] != grid.count:
        raise InputError(f"spectrum has {spectrum.shape[0]} values, grid has {grid.count}")
    u = grid.u
    h = spectrum * np.conj(params.amplitude) * np.exp(-1j * params.output_chirp_rate * u * u)
    # sum_m h_m e^{+j u_m t / b}  ==  conj(sum_m conj(h_m) e^{-j t (u_m / b)})
    acc = np.conj(dft_on_grid(grid.u0 / params.b, grid.du / params.b, np.conj(h),
                              out_grid.t0, out_grid.dt, out_grid.count))
    t = out_grid.t
    values = acc * np.exp(-1j * params.chirp_rate * t * t) * grid.du
    return SampledSignal.on(out_grid, values)



def lct_filter(signal: SampledSignal, params: LctParams, transfer) -> SampledSignal:
    """Multiplicative filtering in the LCT domain: y = L^-1[H(u) L[x](u)].

    ``transfer`` is a callable H(u) or an array on the dual grid of ``signal``.
    """
    grid = FrequencyGrid.dual(signal, params.b)
    h = transfer(grid.u) if callable(transfer) else transfer
    h = np.broadcast_to(np.asarray(h, dtype=np.complex128), (grid.count,))
    spectrum = lct_forward(signal, params, grid) * h
    return lct_inverse(spectrum, params, grid, signal.grid)
