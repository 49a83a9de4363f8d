"""Chirped sinc-interpolation recovery from jittered samples.

    x^(t) = (T/T_N) e^{-j a t^2/2b} sum_n x(t_n) e^{j a t_n^2/2b} sinc((t - nT - zeta_n) / T_N)

with sinc(s) = sin(pi s)/(pi s), T_N = pi b / u_r, and the sum truncated to
|t - nT - zeta_n| <= tap_half_width * T.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import ConfigError, DomainError, InputError
from .lct import LctParams, SampledSignal, TimeGrid
from .sampling import SamplingPlan
from .stochastic import STREAM_ZETA, COUPLINGS, JitterModel, JointJitter, trial_rng

DEFAULT_TAP_HALF_WIDTH = 64


@dataclass(frozen=True)
class ReconstructionSpec:
    T: float
    u_r: float
    params: LctParams
    coupling: str = "zeta-zero"
    zeta_model: JitterModel | None = None
    tap_half_width: int = DEFAULT_TAP_HALF_WIDTH

    def __post_init__(self):
        if not self.T > 0 or not self.u_r > 0:
            raise ConfigError("T and u_r must be positive")
        if self.coupling not in COUPLINGS:
            raise ConfigError(f"unknown coupling {self.coupling!r}")
        if self.coupling == "iid-independent" and self.zeta_model is None:
            raise ConfigError("iid-independent coupling needs a zeta model")
        if int(self.tap_half_width) < 1:
            raise ConfigError("tap_half_width must be a positive integer")
        if self.zeta_model is not None and self.zeta_model.support_radius >= self.T / 2:
            raise ConfigError("zeta support must be below T/2")
        object.__setattr__(self, "tap_half_width", int(self.tap_half_width))

    @classmethod
    def for_joint(cls, T: float, u_r: float, params: LctParams, joint: JointJitter, **kw) -> "ReconstructionSpec":
        return cls(T, u_r, params, joint.coupling, joint.zeta, **kw)

    @property
    def T_N(self) -> float:
        return self.params.nyquist_interval(self.u_r)

    @property
    def margin(self) -> float:
        """Time span on each side needed by the truncated sum."""
        return self.tap_half_width * self.T

    @property
    def oversampled(self) -> bool:
        return self.T <= self.T_N * (1 + 1e-12)


def recon_offsets(plan: SamplingPlan, spec: ReconstructionSpec, seed: int, trial: int) -> np.ndarray:
    """zeta_n according to the coupling: zeros, the sampling offsets, or fresh i.i.d. draws."""
    if spec.coupling == "zeta-zero":
        return np.zeros(len(plan))
    if spec.coupling == "equal-to-xi":
        return np.array(plan.offsets)
    return spec.zeta_model.draw(trial_rng(seed, trial, STREAM_ZETA), len(plan))


def _as_times(out_grid) -> tuple[np.ndarray, TimeGrid | None]:
    if isinstance(out_grid, TimeGrid):
        return out_grid.t, out_grid
    return np.atleast_1d(np.asarray(out_grid, dtype=np.float64)), None


def _synthesize(weights: np.ndarray, plan: SamplingPlan, spec: ReconstructionSpec, t: np.ndarray,
                zeta: np.ndarray) -> np.ndarray:
    zeta = np.asarray(zeta, dtype=np.float64)
    if zeta.shape[0] != len(plan):
        raise InputError("one reconstruction offset per sample is required")
    lo = plan.n_lo * spec.T + spec.margin
    hi = plan.n_hi * spec.T - spec.margin
    slack = 1e-9 * spec.T
    if t.size and (t.min() < lo - slack or t.max() > hi + slack):
        raise DomainError(
            f"output times [{t.min()}, {t.max()}] leave the supported span [{lo}, {hi}]")
    if not spec.oversampled:
        warnings.warn("T exceeds the Nyquist interval; recovery is not exact even without jitter",
                      stacklevel=3)
    centers = plan.nominal + zeta
    acc = _kernels.sinc_sum(t, centers, weights, spec.T_N, spec.margin)
    return (spec.T / spec.T_N) * acc


def _check_samples(samples, plan: SamplingPlan) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.complex128).reshape(-1)
    if samples.size == 0:
        raise InputError("no samples to reconstruct from")
    if samples.shape[0] != len(plan):
        raise InputError(f"{samples.shape[0]} samples for a plan of {len(plan)} instants")
    return samples


def reconstruct(samples, plan: SamplingPlan, spec: ReconstructionSpec, out_grid, zeta=None):
    """Approximate x(t) on ``out_grid`` from x(t_n).

    ``zeta`` overrides the reconstruction offsets; it is required for the
    iid-independent coupling (see ``recon_offsets``).  Returns a SampledSignal
    for a TimeGrid, else an array.
    """
    samples = _check_samples(samples, plan)
    if zeta is None:
        if spec.coupling == "iid-independent":
            raise InputError("iid-independent coupling needs explicit zeta offsets")
        zeta = np.zeros(len(plan)) if spec.coupling == "zeta-zero" else plan.offsets
    t, grid = _as_times(out_grid)
    r = spec.params.chirp_rate
    tn = plan.instants
    weights = samples * np.exp(1j * r * tn * tn)
    values = np.exp(-1j * r * t * t) * _synthesize(weights, plan, spec, t, zeta)
    return SampledSignal.on(grid, values) if grid is not None else values


def fourier_reconstruct(samples, plan: SamplingPlan, spec: ReconstructionSpec, out_grid, zeta=None):
    """The chirp-free recovery formula (the a = 0 case), using ``spec.T_N`` as-is."""
    samples = _check_samples(samples, plan)
    if zeta is None:
        if spec.coupling == "iid-independent":
            raise InputError("iid-independent coupling needs explicit zeta offsets")
        zeta = np.zeros(len(plan)) if spec.coupling == "zeta-zero" else plan.offsets
    t, grid = _as_times(out_grid)
    values = _synthesize(samples, plan, spec, t, zeta)
    return SampledSignal.on(grid, values) if grid is not None else values


def sampling_range_for(spec: ReconstructionSpec, start: float, stop: float) -> tuple[int, int]:
    """Index range of samples needed to reconstruct on [start, stop]."""
    return (int(math.floor((start - spec.margin) / spec.T + 1e-9)),
            int(math.ceil((stop + spec.margin) / spec.T - 1e-9)))
