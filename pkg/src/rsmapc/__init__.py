"""Link-level Monte-Carlo simulator for degeneracy-aware distributed power
control in rate-splitting multi-user MIMO downlinks."""

from .agents import (
    AbmTrace,
    AgentState,
    agent_utility,
    bs_rescale,
    gradient_step,
    heuristic_step,
    run_abm,
    utility_gradient,
)
from .centralized import (
    CentralizedResult,
    MinimaxResult,
    centralized_objective,
    interference_map,
    minimax_bisection,
    solve_centralized,
    yates_fixed_point,
)
from .channel import (
    ChannelRealization,
    draw_realization,
    exp_correlation_matrix,
    ls_estimate,
    sample_channel,
)
from .config import (
    BenchmarkWeights,
    CorrelationSpec,
    PilotConfig,
    SystemConfig,
    UtilityWeights,
    load_config,
)
from .experiments import (
    SCHEMES,
    AggregateResult,
    SweepRow,
    TrialRecord,
    convergence_profile,
    effective_throughput,
    emit_profile,
    emit_results,
    estimate_outage,
    run_trial,
    run_trials,
    sweep,
)
from .metrics import (
    DEGENERACY_CAP,
    DegeneracyRecord,
    StreamQoS,
    degeneracy_record,
    dissimilarity_matrix,
    dwpr,
    local_degeneracy,
    local_fss,
    pairwise_fss,
    stream_dissimilarity,
    system_degeneracy,
)
from .rsma import (
    EffectiveGains,
    Precoders,
    PowerAllocation,
    SinrReport,
    common_sinr,
    effective_gains,
    private_sinr,
    sinr_report,
    sum_rate,
    zf_precoders,
)

__version__ = "0.1.0"
