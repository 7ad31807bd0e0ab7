"""Teleportation channels, the state-channel isomorphism, twirling and local filtering for qudits."""

from .channels import (
    Channel,
    ChannelError,
    apply,
    channel_fidelity_exact,
    channel_fidelity_mc,
    channel_from_state,
    choi,
    depolarizing,
    entanglement_fidelity,
    identity_channel,
    random_channel,
)
from .distill import (
    FilterResult,
    LocalFilter,
    QuasiDistillReport,
    apply_filter,
    make_rho_F,
    make_sigma_F,
    diagonal_filter,
    quasi_distill_sequence,
    threshold_experiment,
    verify_distillation_witness,
    witness_search,
)
from .qmath import haar_state, haar_unitary, partial_trace, partial_transpose, schmidt, tensor, weyl
from .states import (
    BipartiteState,
    InvalidStateError,
    NoisySinglet,
    fidelity_from_fraction,
    fraction_from_fidelity,
    is_ppt,
    max_entangled,
    noisy_singlet,
    noisy_singlet_from_F,
    noisy_singlet_separable,
    singlet_fraction,
    singlet_fraction_m,
)
from .teleport import (
    classical_fidelity,
    optimal_fidelity_from_fraction,
    standard_teleport_channel,
    teleport_sample,
)
from .twirl import twirl_channel, twirl_state_exact, twirl_state_mc

__version__ = "0.1.0"
