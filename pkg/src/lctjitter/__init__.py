"""Jitter sampling and chirped sinc reconstruction of random signals bandlimited in the LCT domain."""

from .exceptions import (
    BandViolationError,
    ConfigError,
    DomainError,
    InputError,
    LctJitterError,
    ParameterError,
)
from .experiment import (
    ExperimentConfig,
    load_config,
    parse_config,
    run_mse_sweep,
    run_reconstruction_demo,
    run_verification_suite,
    serialize_config,
)
from .lct import (
    FrequencyGrid,
    LctParams,
    SampledSignal,
    TimeGrid,
    lct_filter,
    lct_forward,
    lct_inverse,
)
from .mse import (
    MseReport,
    equivalent_recon_system,
    mc_mse,
    mse_report,
    theoretical_mse,
)
from .reconstruction import ReconstructionSpec, fourier_reconstruct, reconstruct
from .sampling import (
    SamplingPlan,
    draw_plan,
    equivalent_system,
    sample_at,
    verify_equivalence,
)
from .stochastic import (
    JitterModel,
    JointJitter,
    RandomProcessSpec,
    SpectralDensity,
    analytic_lct_psd,
    autocorrelation,
    bandwidth_check,
    char_fn,
    joint_char_fn,
    lct_autocorrelation,
    lct_cross_psd,
    lct_psd,
    realize,
)

__version__ = "0.1.0"
