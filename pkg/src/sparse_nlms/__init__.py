"""Sparse NLMS adaptive channel estimation.

Six adaptive estimators (plain, zero-attracting, and reweighted
zero-attracting NLMS, each with a fixed or an error-driven variable step
size), a seeded sparse-channel simulation harness, steady-state MSE theory
bounds, and closed-form PSK/QAM BER approximations.
"""

from .algorithms import (
    ENERGY_FLOOR,
    ISS_NLMS,
    ISS_RZA_NLMS,
    ISS_ZA_NLMS,
    VARIANTS,
    VSS_NLMS,
    VSS_RZA_NLMS,
    VSS_ZA_NLMS,
    AlgorithmSpec,
    FilterState,
    StopCriterion,
    TrialTrace,
    compute_error,
    initial_state,
    run_until_stop,
    rza_penalty,
    sign_vector,
    step,
    vss_step_size,
    vss_update_projection,
    za_penalty,
)
from .channel import (
    ChannelRealization,
    SampleStream,
    generate_channel,
    observe,
    regressor_at,
    training_pairs,
)
from .cli import cli_main
from .configfile import (
    config_from_mapping,
    config_to_mapping,
    dump_config_json,
    load_config,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    ExperimentError,
    OutOfRegimeError,
    SingularMatrixError,
    StreamExhaustedError,
)
from .experiment import (
    AggregateResult,
    ExperimentConfig,
    MseCurve,
    StepSizeTrace,
    run_experiment,
    run_trial,
    trial_seed,
)
from .metrics import (
    BerConstants,
    ModulationScheme,
    TheoryInputs,
    average_mse,
    effective_snr,
    psk_ber,
    qam_ber,
    steady_state_mse_limit,
    steady_state_mse_nlms,
)
from .results_io import emit_results

__version__ = "0.1.0"
