"""Joint precoder, coefficient and active-element placement design for
hybrid RIS-assisted MISO downlinks."""

from .channels import (
    ChannelSet,
    FadingSpec,
    Geometry,
    generate_channels,
    pathloss_linear,
    rician_matrix,
    sample_ue_position,
    trial_rng,
)
from .design import (
    DegenerateChannelError,
    EffectiveChannels,
    HrisDesign,
    InfeasibleDesignError,
    SnrBreakdown,
    SolveResult,
    SystemConfig,
    alternating_solve,
    effective_channels,
    enforce_ris_power,
    mrt_precoder,
    optimal_coefficients,
    optimal_placement,
    r_max_bound,
    ris_noise_power,
    ris_power,
    snr,
)
from .oracle import (
    BoundViolationError,
    GapReport,
    OracleScaleError,
    PlacementCandidate,
    baseline_design,
    eta_max_bound,
    exact_coefficients_for_placement,
    exhaustive_oracle,
    gap_analysis,
)
from .sweep import SweepRow, SweepSpec, emit_csv, run_sweep
from .config import ConfigError, ExperimentConfig, load_config, parse_config

__version__ = "0.1.0"
