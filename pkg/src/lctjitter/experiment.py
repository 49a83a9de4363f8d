"""Experiment configuration and the batch runners behind the CLI.

Configs are YAML mappings.  Numeric fields accept plain numbers or short
arithmetic expressions in ``pi`` (``"1/pi"``, ``"-3*pi/2"``), resolved at parse
time.
"""

from __future__ import annotations

import ast
import csv
import io
import logging
import math
import operator
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .exceptions import ConfigError, LctJitterError
from .lct import FrequencyGrid, LctParams, TimeGrid
from .mse import mc_mse, theoretical_mse
from .reconstruction import ReconstructionSpec, reconstruct, recon_offsets, sampling_range_for
from .sampling import draw_plan, sample_at
from .stochastic import (
    COUPLINGS,
    NOISE,
    JitterModel,
    JointJitter,
    RandomProcessSpec,
    analytic_lct_psd,
    evaluate_tone,
    noise_companion,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
_TOP_KEYS = frozenset({"schema", "matrix", "signal", "u_r", "T", "T_N", "jitter", "couplings", "trials", "seed",
                       "out_grid", "interior_margin", "tap_half_width", "psd_step", "demo_index", "output"})

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e}


def parse_number(value, name: str = "value") -> float:
    """Float from a number or a small arithmetic expression such as ``"1/pi"``."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    try:
        tree = ast.parse(value.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"{name}: cannot parse {value!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ConfigError(f"{name}: unsupported expression {value!r}")

    try:
        return float(ev(tree))
    except ZeroDivisionError as exc:
        raise ConfigError(f"{name}: division by zero in {value!r}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    matrix: tuple[float, float, float, float]
    signal: RandomProcessSpec
    u_r: float
    T: float
    jitter_family: str = "uniform"
    half_widths: tuple[float, ...] = (0.01,)
    sweep_k: tuple[int, ...] = (0,)
    couplings: tuple[str, ...] = ("zeta-zero",)
    trials: int = 2000
    seed: int = 0
    window: tuple[float, float] = (-4.0, 4.0)
    out_step: float = 0.01
    interior_margin: float | None = None
    tap_half_width: int = 64
    psd_step: float = 0.01
    demo_index: int = 0
    output: str = "results"
    T_N: float | None = None

    def __post_init__(self):
        self.params  # validates the matrix
        if self.trials < 1:
            raise ConfigError("trials: must be a positive integer")
        if not self.T > 0 or not self.u_r > 0:
            raise ConfigError("T and u_r must be positive")
        if self.T_N is not None and abs(self.T_N - self.nyquist) > 1e-12 * max(1.0, self.nyquist):
            raise ConfigError(f"T_N: {self.T_N} does not equal pi*b/u_r = {self.nyquist}")
        if not self.half_widths:
            raise ConfigError("jitter: the sweep is empty")
        if len(self.sweep_k) != len(self.half_widths):
            raise ConfigError("jitter: sweep labels and half-widths differ in length")
        for c in self.couplings:
            if c not in COUPLINGS:
                raise ConfigError(f"couplings: unknown coupling {c!r}")
        if not self.couplings:
            raise ConfigError("couplings: at least one coupling is required")
        for hw in self.half_widths:
            self.jitter(hw)
            if hw >= self.T / 2:
                raise ConfigError(f"jitter: half-width {hw} must be below T/2 = {self.T / 2}")
        if self.window[1] <= self.window[0]:
            raise ConfigError("window: stop must exceed start")
        if not self.out_step > 0 or not self.psd_step > 0:
            raise ConfigError("steps must be positive")
        if not 0 <= self.demo_index < len(self.half_widths):
            raise ConfigError("demo_index: outside the sweep")
        if not self.oversampled:
            warnings.warn(f"T = {self.T} exceeds T_N = {self.nyquist}; recovery is not exact even without jitter",
                          stacklevel=2)

    @property
    def params(self) -> LctParams:
        try:
            return LctParams(*self.matrix)
        except LctJitterError as exc:
            raise ConfigError(f"matrix: {exc}") from exc

    @property
    def nyquist(self) -> float:
        return math.pi * self.matrix[1] / self.u_r

    @property
    def oversampled(self) -> bool:
        return self.T <= self.nyquist * (1 + 1e-12)

    def jitter(self, half_width: float) -> JitterModel:
        if self.jitter_family == "none" or half_width == 0:
            return JitterModel()
        if self.jitter_family != "uniform":
            raise ConfigError(f"jitter: unsupported sweep family {self.jitter_family!r}")
        return JitterModel.uniform(half_width)

    def joint(self, half_width: float, coupling: str) -> JointJitter:
        model = self.jitter(half_width)
        return JointJitter(model, coupling, model if coupling == "iid-independent" else None)

    def recon_spec(self, joint: JointJitter) -> ReconstructionSpec:
        return ReconstructionSpec.for_joint(self.T, self.u_r, self.params, joint,
                                            tap_half_width=self.tap_half_width)

    @property
    def margin(self) -> float:
        return self.tap_half_width * self.T if self.interior_margin is None else self.interior_margin

    def record(self) -> TimeGrid:
        """Realization grid: the evaluation window widened by margin + T on both sides.

        The extra T leaves room for jittered instants near the record ends.
        """
        steps = int(math.ceil((self.margin + self.T) / self.out_step - 1e-9))
        start = self.window[0] - steps * self.out_step
        stop = self.window[1] + steps * self.out_step
        return TimeGrid.span(start, stop, self.out_step)

    def window_grid(self) -> TimeGrid:
        return TimeGrid.span(self.window[0], self.window[1], self.out_step)

    def psd_grid(self) -> FrequencyGrid:
        return FrequencyGrid.symmetric(self.u_r, self.psd_step)

    def with_overrides(self, trials=None, seed=None, output=None) -> "ExperimentConfig":
        kw = {}
        if trials is not None:
            kw["trials"] = int(trials)
        if seed is not None:
            kw["seed"] = int(seed)
        if output is not None:
            kw["output"] = str(output)
        return replace(self, **kw)


def _require(mapping, key, where="config"):
    if key not in mapping:
        raise ConfigError(f"{where}: missing field {key!r}")
    return mapping[key]


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown config key")
    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"schema: unsupported version {schema!r}")
    m = _require(data, "matrix")
    matrix = tuple(parse_number(_require(m, k, "matrix"), f"matrix.{k}") for k in "abcd")

    s = _require(data, "signal")
    signal = RandomProcessSpec(
        kind=s.get("kind", "random-phase-tone"),
        tone_frequency=parse_number(s.get("tone_frequency", 0), "signal.tone_frequency"),
        chirp_rate=parse_number(s.get("chirp_rate", 0), "signal.chirp_rate"),
        band_edge=parse_number(s.get("band_edge", 0), "signal.band_edge"),
        seed=int(s.get("seed", data.get("seed", 0))),
        phase_law=s.get("phase_law", "uniform"),
        amplitude=parse_number(s.get("amplitude", 1), "signal.amplitude"),
    )

    j = data.get("jitter", {"family": "none"})
    family = j.get("family", "uniform")
    if family == "none":
        half_widths, ks = (0.0,), (0,)
    elif "half_widths" in j:
        half_widths = tuple(parse_number(v, "jitter.half_widths") for v in j["half_widths"])
        ks = tuple(range(len(half_widths)))
    else:
        k_lo, k_hi = (int(v) for v in j.get("k_range", [0, 0]))
        base = parse_number(_require(j, "base", "jitter"), "jitter.base")
        step = parse_number(j.get("step", 0), "jitter.step")
        ks = tuple(range(k_lo, k_hi + 1))
        half_widths = tuple(base + step * k for k in ks)

    out = data.get("out_grid", {})
    window = tuple(parse_number(v, "out_grid.window") for v in out.get("window", [-4, 4]))
    if len(window) != 2:
        raise ConfigError("out_grid.window: expected [start, stop]")
    t_n = data.get("T_N")
    margin = data.get("interior_margin")
    return ExperimentConfig(
        matrix=matrix,
        signal=signal,
        u_r=parse_number(_require(data, "u_r"), "u_r"),
        T=parse_number(_require(data, "T"), "T"),
        jitter_family=family,
        half_widths=half_widths,
        sweep_k=ks,
        couplings=tuple(data.get("couplings", ["zeta-zero"])),
        trials=int(data.get("trials", 2000)),
        seed=int(data.get("seed", 0)),
        window=window,
        out_step=parse_number(out.get("step", 0.01), "out_grid.step"),
        interior_margin=None if margin is None else parse_number(margin, "interior_margin"),
        tap_half_width=int(data.get("tap_half_width", 64)),
        psd_step=parse_number(data.get("psd_step", 0.01), "psd_step"),
        demo_index=int(data.get("demo_index", 0)),
        output=str(data.get("output", "results")),
        T_N=None if t_n is None else parse_number(t_n, "T_N"),
    )


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: invalid YAML ({exc})") from exc
    return config_from_dict(data)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def config_to_dict(cfg: ExperimentConfig) -> dict:
    s = cfg.signal
    return {
        "schema": SCHEMA_VERSION,
        "matrix": dict(zip("abcd", cfg.matrix)),
        "signal": {
            "kind": s.kind,
            "tone_frequency": s.tone_frequency,
            "chirp_rate": s.chirp_rate,
            "band_edge": s.band_edge,
            "seed": s.seed,
            "phase_law": s.phase_law,
            "amplitude": s.amplitude,
        },
        "u_r": cfg.u_r,
        "T": cfg.T,
        "T_N": cfg.T_N,
        "jitter": ({"family": "none"} if cfg.jitter_family == "none"
                   else {"family": cfg.jitter_family, "half_widths": list(cfg.half_widths)}),
        "couplings": list(cfg.couplings),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "out_grid": {"window": list(cfg.window), "step": cfg.out_step},
        "interior_margin": cfg.interior_margin,
        "tap_half_width": cfg.tap_half_width,
        "psd_step": cfg.psd_step,
        "demo_index": cfg.demo_index,
        "output": cfg.output,
    }


def serialize_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(",".join(header) + "\n" + _csv_text(rows))
    return path


@dataclass
class DemoResult:
    rows: list = field(default_factory=list)
    max_error: dict = field(default_factory=dict)
    path: Path | None = None


def run_reconstruction_demo(cfg: ExperimentConfig, out_dir=None, trial: int = 0) -> DemoResult:
    """One realization reconstructed per coupling, on the evaluation window."""
    hw = cfg.half_widths[cfg.demo_index]
    window = cfg.window_grid()
    t = window.t
    result = DemoResult()
    for coupling in cfg.couplings:
        joint = cfg.joint(hw, coupling)
        spec = cfg.recon_spec(joint)
        n_range = sampling_range_for(spec, t[0], t[-1])
        plan = draw_plan(cfg.T, n_range, joint.xi, cfg.seed, trial)
        if cfg.signal.kind == NOISE:
            record = TimeGrid.span(n_range[0] * cfg.T - cfg.T, n_range[1] * cfg.T + cfg.T, cfg.out_step)
            samples = sample_at(cfg.signal, plan, trial, record)
            k0 = int(round((t[0] - record.t0) / record.dt))
            truth = noise_companion(cfg.signal, record, trial)[k0:k0 + len(t)] * np.exp(
                1j * cfg.signal.chirp_rate * t * t)
        else:
            samples = sample_at(cfg.signal, plan, trial)
            truth = evaluate_tone(cfg.signal, t, trial)
        zeta = recon_offsets(plan, spec, cfg.seed, trial)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = reconstruct(samples, plan, spec, t, zeta)
        err = np.abs(est - truth)
        result.max_error[coupling] = float(err.max())
        for ti, xi, xh in zip(t, truth, est):
            result.rows.append([coupling, float(ti), float(xi.real), float(xi.imag),
                                float(xh.real), float(xh.imag)])
    if out_dir is not None:
        result.path = _write_csv(Path(out_dir) / "reconstruction_demo.csv",
                                 ["coupling", "t", "x_re", "x_im", "xhat_re", "xhat_im"], result.rows)
    return result


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    path: Path | None = None


def run_mse_sweep(cfg: ExperimentConfig, out_dir=None, workers: int = 1) -> SweepResult:
    """Theory and Monte Carlo MSE for every (sweep point, coupling)."""
    params = cfg.params
    psd = analytic_lct_psd(cfg.signal, params, cfg.psd_grid())
    record = cfg.record()
    result = SweepResult()
    for k, hw in zip(cfg.sweep_k, cfg.half_widths):
        for coupling in cfg.couplings:
            joint = cfg.joint(hw, coupling)
            spec = cfg.recon_spec(joint)
            theory = theoretical_mse(psd, joint, params, cfg.T, cfg.u_r).total
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                mc = mc_mse(cfg.signal, joint, spec, cfg.trials, record, cfg.margin, cfg.seed, workers).mse
            gap = abs(mc - theory) / max(theory, 1e-12)
            log.info("k=%d hw=%.4g %s theory=%.6g mc=%.6g gap=%.3g", k, hw, coupling, theory, mc, gap)
            result.rows.append([k, float(hw), coupling, float(theory), float(mc), float(gap)])
    if out_dir is not None:
        result.path = _write_csv(Path(out_dir) / "mse_sweep.csv",
                                 ["k", "half_width", "coupling", "mse_theory", "mse_mc", "relative_gap"],
                                 result.rows)
    return result


# ---------------------------------------------------------------------------
# verification suite
# ---------------------------------------------------------------------------

ZERO_JITTER_TAPS = 1 << 19


@dataclass(frozen=True)
class CheckResult:
    group: str
    passed: bool | None  # None: skipped
    detail: str

    @property
    def status(self) -> str:
        return "SKIP" if self.passed is None else ("PASS" if self.passed else "FAIL")


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def lines(self) -> list[str]:
        return [f"{c.status} {c.group}: {c.detail}" for c in self.checks]


def _tolerance(base: float, trials: int) -> float:
    """Statistical tolerance, widened like 1/sqrt(trials) below 500 trials."""
    return base * max(1.0, math.sqrt(500 / trials))


def _rel_l2(est, ref) -> float:
    return float(np.linalg.norm(est - ref) / max(np.linalg.norm(ref), 1e-300))


def check_lct(cfg: ExperimentConfig) -> CheckResult:
    from .lct import SampledSignal, lct_forward, lct_inverse

    grid = TimeGrid.span(-8.0, 8.0, 1 / 64)
    gauss = SampledSignal.on(grid, np.exp(-grid.t ** 2 / 2))
    fgrid = FrequencyGrid.dual(gauss, 1.0)
    band = np.abs(fgrid.u) <= 4
    spec = lct_forward(gauss, LctParams.fourier(), fgrid)
    want = np.exp(-1j * math.pi / 4) * np.exp(-fgrid.u ** 2 / 2)
    rms_fwd = float(np.sqrt(np.mean(np.abs(spec - want)[band] ** 2)))

    params = cfg.params
    chirped = SampledSignal.on(grid, np.exp(-grid.t ** 2 / 2 + 1j * 5 * grid.t - 1j * 1.5 * math.pi * grid.t ** 2))
    pgrid = FrequencyGrid.dual(chirped, params.b)
    x_hat = lct_forward(chirped, params, pgrid)
    back = lct_inverse(x_hat, params, pgrid, grid).values
    inner = np.abs(grid.t) <= 4
    rms_rt = float(np.sqrt(np.mean(np.abs(back - chirped.values)[inner] ** 2)))
    parseval = abs(float(np.sum(np.abs(x_hat) ** 2) * pgrid.du) / chirped.energy() - 1.0)
    ok = rms_fwd <= 1e-6 and rms_rt <= 1e-6 and parseval <= 1e-8
    return CheckResult("lct", ok, f"gaussian rms={rms_fwd:.2e} roundtrip rms={rms_rt:.2e} "
                                  f"parseval={parseval:.2e}")


def check_filter_law(cfg: ExperimentConfig, trials: int | None = None) -> CheckResult:
    from .lct import lct_filter
    from .stochastic import lct_cross_psd, lct_psd, realize

    params = cfg.params
    trials = cfg.trials if trials is None else trials
    noise = RandomProcessSpec(NOISE, 0.0, -params.chirp_rate, cfg.u_r / params.b, seed=cfg.seed)
    grid = TimeGrid(-20.48, 0.01, 4096)
    fgrid = FrequencyGrid.dual(grid, params.b)
    u = fgrid.u
    h = (np.abs(u) <= cfg.u_r / 2).astype(float)
    xs = [realize(noise, grid, k) for k in range(trials)]
    ys = [lct_filter(x, params, h) for x in xs]
    band = np.abs(u) <= cfg.u_r
    p_x = analytic_lct_psd(noise, params, fgrid).values
    auto = _rel_l2(lct_psd(ys, params, fgrid).values[band], (h * h * p_x)[band])
    p_est = lct_psd(xs, params, fgrid).values
    cross = _rel_l2(lct_cross_psd(ys, xs, params, fgrid)[band], (h * p_est)[band])
    tol = _tolerance(0.05, trials)
    ok = auto <= tol and cross <= tol
    return CheckResult("filter-law", ok, f"P_yy rel L2={auto:.3g} P_yx rel L2={cross:.3g} (tol {tol:.3g})")


def check_equivalence(cfg: ExperimentConfig, trials: int | None = None) -> CheckResult:
    from .sampling import verify_equivalence

    params = cfg.params
    trials = max(100, cfg.trials if trials is None else trials)
    hw = cfg.half_widths[cfg.demo_index]
    jitter = cfg.jitter(hw)
    if cfg.signal.kind == NOISE:
        return CheckResult("equivalence", None, "needs the random-phase tone")
    psd = analytic_lct_psd(cfg.signal, params, cfg.psd_grid())
    rep = verify_equivalence(cfg.signal, jitter, params, cfg.T, np.arange(-10, 11), trials, psd, seed=cfg.seed)
    tol = _tolerance(0.05, trials)
    return CheckResult("equivalence", rep.max_deviation <= tol,
                       f"max deviation over |k|<=10: {rep.max_deviation:.3g} (tol {tol:.3g})")


def check_mse(cfg: ExperimentConfig, trials: int | None = None, workers: int = 1) -> CheckResult:
    params = cfg.params
    psd = analytic_lct_psd(cfg.signal, params, cfg.psd_grid())
    trials = max(100, cfg.trials if trials is None else trials)
    hw = cfg.half_widths[cfg.demo_index]
    worst = 0.0
    parts = []
    for coupling in cfg.couplings:
        joint = cfg.joint(hw, coupling)
        theory = theoretical_mse(psd, joint, params, cfg.T, cfg.u_r).total
        if theory == 0:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mc = mc_mse(cfg.signal, joint, cfg.recon_spec(joint), trials, cfg.record(), cfg.margin,
                        cfg.seed, workers).mse
        gap = abs(mc - theory) / theory
        worst = max(worst, gap)
        parts.append(f"{coupling} theory={theory:.4g} mc={mc:.4g}")
    if not parts:
        return CheckResult("mse", None, "zero jitter; covered by zero-jitter group")
    tol = _tolerance(0.15, trials)
    return CheckResult("mse", worst <= tol, "; ".join(parts) + f"; worst gap {worst:.3g} (tol {tol:.3g})")


def check_zero_jitter(cfg: ExperimentConfig) -> CheckResult:
    if not cfg.oversampled:
        warnings.warn("T exceeds T_N; zero-jitter exactness checks skipped", stacklevel=2)
        return CheckResult("zero-jitter", None, "T > T_N; exactness not expected")
    if cfg.signal.kind == NOISE:
        return CheckResult("zero-jitter", None, "needs the random-phase tone")
    params = cfg.params
    psd = analytic_lct_psd(cfg.signal, params, cfg.psd_grid())
    joint = JointJitter(JitterModel(), "zeta-zero")
    theory = theoretical_mse(psd, joint, params, cfg.T, cfg.u_r)
    spec = ReconstructionSpec(cfg.T, cfg.u_r, params, tap_half_width=max(cfg.tap_half_width, ZERO_JITTER_TAPS))
    t = cfg.window_grid().t
    plan = draw_plan(cfg.T, sampling_range_for(spec, t[0], t[-1]), JitterModel(), cfg.seed, 0)
    est = reconstruct(sample_at(cfg.signal, plan, 0), plan, spec, t)
    err = float(np.max(np.abs(est - evaluate_tone(cfg.signal, t, 0))))
    ok = theory.total == 0.0 and err <= 1e-6
    return CheckResult("zero-jitter", ok, f"theory={theory.total!r} max|xhat-x|={err:.2e}")


def check_determinism(cfg: ExperimentConfig, workers: int = 1) -> CheckResult:
    small = replace(cfg, trials=min(cfg.trials, 100), half_widths=cfg.half_widths[:1], sweep_k=cfg.sweep_k[:1],
                    demo_index=0)
    runs = []
    for _ in range(2):
        runs.append(_csv_text(run_mse_sweep(small, workers=workers).rows))
    return CheckResult("determinism", runs[0] == runs[1], "two sweeps byte-identical" if runs[0] == runs[1]
                       else "sweep output differs between runs")


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def run_verification_suite(cfg: ExperimentConfig, workers: int = 1) -> VerificationReport:
    """Run every invariant group at the config's scale."""
    report = VerificationReport()
    report.checks.append(check_lct(cfg))
    report.checks.append(check_filter_law(cfg))
    report.checks.append(check_equivalence(cfg))
    report.checks.append(check_mse(cfg, workers=workers))
    report.checks.append(check_zero_jitter(cfg))
    report.checks.append(check_determinism(cfg, workers))
    for c in report.checks:
        log.info("%s %s: %s", c.status, c.group, c.detail)
    return report
