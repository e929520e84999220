"""sigpow: signalling and exclusion power of quantum processes.

Quantifies information flow through channels, channels with memory,
superchannels and bipartite process matrices via semidefinite programming,
with closed-form phase-covariant dynamics and a truncated Jaynes-Cummings
supermap for backflow analyses.
"""

from .channels import (
    ChannelDescriptor,
    Instrument,
    SuperchannelDescriptor,
    apply_channel,
    apply_superchannel,
    channel_from_choi,
    channel_from_kraus,
    channel_from_map,
    completely_depolarizing,
    identity_channel,
    identity_superchannel,
    is_bistochastic_superchannel,
    link,
    random_bistochastic_superchannel,
    random_cptp,
    random_holevo_channel,
    random_state,
    superchannel_from_parts,
    trace_and_prepare,
    unitary_channel,
    validate_comb,
    weyl_unitaries,
)
from .errors import SigpowError
from .jaynescummings import JcConfig, backflow_scan, jc_unitary, supermap_output_channel
from .phasecov import (
    RateModel,
    backflow_condition,
    constant_rates,
    divisibility_thresholds,
    eternal_nm_model,
    eternal_nm_rate,
    evolve,
    kappa_model,
    scan_dynamics,
)
from .processes import (
    ProcessMatrix,
    cause_mixture,
    check_non_signalling,
    common_cause_process,
    direct_cause_process,
    born_probability,
    process_signalling_curve,
    random_process_matrix,
    validate_process_matrix,
)
from .sdp import (
    SdpProblem,
    SdpSolution,
    SolverOptions,
    diamond_norm_distance,
    least_dominating_marginal,
    solve,
)
from .signalling import (
    causal_loop_inequality,
    exclusion_game_value,
    exclusion_power,
    extract_superdense_strategy,
    memory_channel_signalling,
    p_from_s_relation,
    quantum_memory_witness,
    signalling_power,
)
from .wires import LabeledOperator, Wire, check_hermitian_psd, identity_operator

__version__ = "0.1.0"
