"""Mean-square reconstruction error: closed form versus Monte Carlo.

For x bandlimited to |u| <= u_r in the LCT domain,

    E|x^(t) - x(t)|^2 = int P(u) |1 - phi(u/b, -u/b)|^2 du
                      + T/(2 pi b) int P(u) int_{-u_r}^{u_r} 1 - |phi(u/b, -u1/b)|^2 du1 du

where phi is the joint characteristic function of (xi_n, zeta_n).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BandViolationError, ConfigError
from .lct import FrequencyGrid, LctParams, TimeGrid
from .reconstruction import ReconstructionSpec, reconstruct, recon_offsets
from .sampling import draw_plan, sample_at
from .stochastic import (
    NOISE,
    JointJitter,
    RandomProcessSpec,
    SpectralDensity,
    evaluate_tone,
    joint_char_fn,
    noise_companion,
    trapezoid,
)

GAP_FLOOR = 1e-12
BAND_TOLERANCE = 1e-6


@dataclass(frozen=True)
class TheoreticalMse:
    term1: float
    term2: float

    @property
    def total(self) -> float:
        return self.term1 + self.term2


@dataclass(frozen=True)
class MonteCarloMse:
    mse: float
    trials: int
    stderr: float
    per_trial: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class MseReport:
    theory: float
    monte_carlo: float
    trials: int
    term1: float
    term2: float

    @property
    def relative_gap(self) -> float:
        return abs(self.monte_carlo - self.theory) / max(self.theory, GAP_FLOOR)

    @classmethod
    def from_parts(cls, theory: TheoreticalMse, mc: MonteCarloMse) -> "MseReport":
        return cls(theory.total, mc.mse, mc.trials, theory.term1, theory.term2)


def _band_nodes(psd: SpectralDensity, u_r: float) -> np.ndarray:
    k = max(2, int(math.ceil(2.0 * u_r / psd.grid.du)) + 1)
    return np.linspace(-u_r, u_r, k)


def _check_band(psd: SpectralDensity, u_r: float, tol: float):
    total = psd.mass()
    outside = total - psd.mass(band=u_r)
    if total > 0 and outside > tol * total:
        raise BandViolationError(
            f"{outside / total:.3g} of the spectral mass lies outside |u| <= {u_r}")


def _inner_deficit(joint: JointJitter, b: float, u: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """int_{-u_r}^{u_r} 1 - |phi(u/b, -u1/b)|^2 du1 for each u (trapezoid on ``nodes``)."""
    phi = joint_char_fn(joint, u[:, None] / b, -nodes[None, :] / b)
    return trapezoid(1.0 - np.abs(phi) ** 2, nodes, axis=1)


def theoretical_mse(psd: SpectralDensity, joint: JointJitter, params: LctParams, T: float, u_r: float,
                    band_tolerance: float = BAND_TOLERANCE) -> TheoreticalMse:
    """Closed-form MSE split into its bias (term1) and noise (term2) parts."""
    _check_band(psd, u_r, band_tolerance)
    b = params.b
    nodes = _band_nodes(psd, u_r)

    u = psd.grid.u
    inside = np.abs(u) <= u_r * (1 + 1e-12)
    dens = np.where(inside, psd.values, 0.0)
    term1 = 0.0
    term2 = 0.0
    if np.any(dens > 0):
        ui = u[inside]
        bias = np.abs(1.0 - joint_char_fn(joint, ui / b, -ui / b)) ** 2
        deficit = _inner_deficit(joint, b, ui, nodes)
        full_bias = np.zeros_like(u)
        full_def = np.zeros_like(u)
        full_bias[inside] = bias
        full_def[inside] = deficit
        term1 += float(trapezoid(dens * full_bias, dx=psd.grid.du))
        term2 += float(trapezoid(dens * full_def, dx=psd.grid.du))
    for loc, mass in psd.lines:
        if abs(loc) > u_r * (1 + 1e-12):
            continue
        term1 += mass * abs(1.0 - joint_char_fn(joint, loc / b, -loc / b)) ** 2
        term2 += mass * float(_inner_deficit(joint, b, np.array([loc]), nodes)[0])
    term2 *= T / (2.0 * math.pi * b)
    return TheoreticalMse(max(term1, 0.0), max(term2, 0.0))


@dataclass(frozen=True, eq=False)
class ReconSystem:
    """Filter H3(u) = phi(u/b, -u/b) and additive-noise LCT PSD of the recovery chain."""

    joint: JointJitter
    params: LctParams
    grid: FrequencyGrid
    h3: np.ndarray = field(repr=False)
    noise_psd: SpectralDensity = field(repr=False)

    def h3_at(self, u):
        b = self.params.b
        return joint_char_fn(self.joint, np.asarray(u) / b, -np.asarray(u) / b)

    def output_psd(self, psd: SpectralDensity) -> SpectralDensity:
        """Predicted LCT PSD of x^: P |H3|^2 + noise, with lines scaled by |H3|^2."""
        lines = tuple((loc, mass * abs(self.h3_at(loc)) ** 2) for loc, mass in psd.lines)
        return SpectralDensity(self.grid, psd.values * np.abs(self.h3) ** 2 + self.noise_psd.values,
                               "lct", lines)


def equivalent_recon_system(psd: SpectralDensity, joint: JointJitter, params: LctParams, T: float,
                            u_r: float, band_tolerance: float = BAND_TOLERANCE) -> ReconSystem:
    """H3 and the LCT-domain PSD of the additive noise v on the psd grid.

    The noise density is T/(2 pi b) int P(u1) [1 - |phi(u1/b, -u/b)|^2] du1 for
    |u| < u_r and zero outside.
    """
    _check_band(psd, u_r, band_tolerance)
    b = params.b
    u = psd.grid.u
    h3 = joint_char_fn(joint, u / b, -u / b)
    nodes = _band_nodes(psd, u_r)
    # continuous part of P(u1) on the integration nodes, plus analytic lines
    p_nodes = np.interp(nodes, u, psd.values, left=0.0, right=0.0)
    phi = joint_char_fn(joint, nodes[None, :] / b, -u[:, None] / b)
    noise = trapezoid(p_nodes[None, :] * (1.0 - np.abs(phi) ** 2), nodes, axis=1)
    for loc, mass in psd.lines:
        if abs(loc) <= u_r * (1 + 1e-12):
            noise = noise + mass * (1.0 - np.abs(joint_char_fn(joint, loc / b, -u / b)) ** 2)
    noise = np.where(np.abs(u) < u_r, noise * T / (2.0 * math.pi * b), 0.0)
    return ReconSystem(joint, params, psd.grid, h3, SpectralDensity(psd.grid, noise, "lct"))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def _interior(record: TimeGrid, margin: float, lo: float, hi: float) -> np.ndarray:
    """Record indices at least ``margin`` inside the record and inside [lo, hi]."""
    k = np.arange(record.count)
    t = record.t0 + record.dt * k
    slack = 1e-9 * record.dt
    keep = ((t >= record.t0 + margin - slack) & (t <= record.stop - margin + slack)
            & (t >= lo - slack) & (t <= hi + slack))
    return k[keep]


def _trial_error(process: RandomProcessSpec, joint: JointJitter, spec: ReconstructionSpec, record: TimeGrid,
                 idx: np.ndarray, t_out: np.ndarray, n_range: tuple[int, int], seed: int, trial: int) -> float:
    plan = draw_plan(spec.T, n_range, joint.xi, seed, trial)
    if process.kind == NOISE:
        samples = sample_at(process, plan, trial, record)
        truth = (noise_companion(process, record, trial)[idx]
                 * np.exp(1j * process.chirp_rate * t_out * t_out))
    else:
        samples = sample_at(process, plan, trial)
        truth = evaluate_tone(process, t_out, trial)
    zeta = recon_offsets(plan, spec, seed, trial)
    est = reconstruct(samples, plan, spec, t_out, zeta)
    return float(np.mean(np.abs(est - truth) ** 2))


def mc_mse(process: RandomProcessSpec, joint: JointJitter, spec: ReconstructionSpec, trials: int,
           record: TimeGrid, interior_margin: float | None = None, seed: int = 0,
           workers: int = 1) -> MonteCarloMse:
    """Average of |x^(t) - x(t)|^2 over interior points of ``record`` and over trials.

    Samples exist only for instants t_n that stay inside ``record``; the first and
    last ``interior_margin`` seconds (default tap_half_width * T) are excluded.
    Per-trial results are reduced in trial order, so the value does not depend
    on ``workers``.
    """
    if trials < 100:
        raise ConfigError("Monte Carlo MSE needs at least 100 trials")
    if joint.coupling != spec.coupling:
        raise ConfigError("jitter coupling and reconstruction coupling differ")
    margin = spec.margin if interior_margin is None else float(interior_margin)
    if margin < spec.margin - 1e-12:
        raise ConfigError("interior margin is smaller than the reconstruction window")
    # keep every jittered instant inside the record
    r = joint.xi.support_radius
    n_range = (int(math.ceil((record.t0 + r) / spec.T - 1e-9)), int(math.floor((record.stop - r) / spec.T + 1e-9)))
    idx = _interior(record, margin, n_range[0] * spec.T + spec.margin, n_range[1] * spec.T - spec.margin)
    if idx.size == 0:
        raise ConfigError("no interior points left after removing the margin")
    t_out = record.t0 + record.dt * idx

    def run(trial):
        return _trial_error(process, joint, spec, record, idx, t_out, n_range, seed, trial)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_trial = np.fromiter(pool.map(run, range(trials)), dtype=np.float64, count=trials)
    else:
        per_trial = np.fromiter((run(k) for k in range(trials)), dtype=np.float64, count=trials)
    mse = float(per_trial.mean())
    stderr = float(per_trial.std(ddof=1) / math.sqrt(trials))
    return MonteCarloMse(mse, trials, stderr, per_trial)


def mse_report(process: RandomProcessSpec, psd: SpectralDensity, joint: JointJitter, spec: ReconstructionSpec,
               trials: int, record: TimeGrid, interior_margin: float | None = None, seed: int = 0,
               workers: int = 1) -> MseReport:
    theory = theoretical_mse(psd, joint, spec.params, spec.T, spec.u_r)
    mc = mc_mse(process, joint, spec, trials, record, interior_margin, seed, workers)
    return MseReport.from_parts(theory, mc)
