"""Feedback coding and capacity computations for the two-user Gaussian MAC
with additive interference known non-causally at the transmitters, plus
finite-alphabet inner/outer bound machinery."""

from .codec import (
    BlockResult,
    GaussianMacConfig,
    ReceiverState,
    TransmitterState,
    decode_message,
    map_message,
    precancel_schedule,
    run_block,
    write_trace_csv,
)
from .dm_state import (
    DmRegion,
    FiniteChannel,
    InnerPolicy,
    Joint,
    OuterPolicy,
    RateTriple,
    build_joint,
    builtin_channel,
    class_gamma_check,
    exhaustive_sum_oracle,
    induced_outer_policy,
    inner_rate_triple,
    load_channel,
    maximize_inner,
    maximize_outer,
    mutual_information,
    outer_rate_triple,
)
from .errors import (
    ConvergenceError,
    InvalidParameterError,
    MacFbError,
    ProtocolOrderError,
    TableValidationError,
)
from .montecarlo import (
    DecayRow,
    SimConfig,
    TrialStats,
    decay_probe,
    gains_for_config,
    run_single_trial,
    run_trials,
    state_invariance_check,
)
from .regions import (
    HybridPoint,
    RatePair,
    RegionBoundary,
    hybrid_point,
    hybrid_sweep,
    point_in_region,
    rates_to_gains,
    region_sweep,
    solve_rho,
    sum_capacity_point,
)
from .riccati import (
    Covariance2,
    GainSet,
    gain_set,
    optimal_gain,
    riccati_fixed_point,
    riccati_step,
    riccati_trajectory,
    steady_state_closed_form,
)

__version__ = "0.1.0"

__all__ = [
    "BlockResult",
    "ConvergenceError",
    "Covariance2",
    "DecayRow",
    "DmRegion",
    "FiniteChannel",
    "GainSet",
    "GaussianMacConfig",
    "HybridPoint",
    "InnerPolicy",
    "InvalidParameterError",
    "Joint",
    "MacFbError",
    "OuterPolicy",
    "ProtocolOrderError",
    "RatePair",
    "RateTriple",
    "ReceiverState",
    "RegionBoundary",
    "SimConfig",
    "TableValidationError",
    "TransmitterState",
    "TrialStats",
    "build_joint",
    "builtin_channel",
    "class_gamma_check",
    "decay_probe",
    "decode_message",
    "exhaustive_sum_oracle",
    "gain_set",
    "gains_for_config",
    "hybrid_point",
    "hybrid_sweep",
    "induced_outer_policy",
    "inner_rate_triple",
    "load_channel",
    "map_message",
    "maximize_inner",
    "maximize_outer",
    "mutual_information",
    "optimal_gain",
    "outer_rate_triple",
    "point_in_region",
    "precancel_schedule",
    "rates_to_gains",
    "region_sweep",
    "riccati_fixed_point",
    "riccati_step",
    "riccati_trajectory",
    "run_block",
    "run_single_trial",
    "run_trials",
    "solve_rho",
    "state_invariance_check",
    "steady_state_closed_form",
    "sum_capacity_point",
    "write_trace_csv",
]
