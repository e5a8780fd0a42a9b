"""Photon-polariton scattering in a doped coupled-cavity chain."""

__version__ = "0.1.0"

from .analytic import (
    BoundStateParams,
    bound_energies,
    bound_state,
    delta_kick_transitions,
    odd_parity_state,
    open_chain_bound_energies,
    overlap_p,
    perturbative_transitions,
    quantized_odd_momenta,
    scattering_coefficients,
    scattering_state,
    solve_beta,
    solve_beta_open_chain,
)
from .model import (
    INFINITE,
    Basis,
    ModelKind,
    ModelParams,
    PulseSpec,
    Sector,
    SparseOperator,
    build_hubbard_hamiltonian,
    build_kicked_hamiltonian,
    build_spin_hamiltonian,
    commutator_norm,
    enumerate_basis,
    parity_operator,
    total_excitation_operator,
)
from .observables import (
    ChannelDecomposition,
    ObservableSeries,
    PacketSpec,
    channel_decomposition,
    compose_two_excitation,
    energy_mismatch,
    gamma_emission,
    gamma_window_end,
    gaussian_packet,
    p_res,
    photon_density,
    polariton_witness,
    trailing_average,
    transmission_reflection,
)
from .propagate import (
    Trajectory,
    evolve,
    evolve_pulsed,
    expm_apply,
    full_diag_reference,
    pulsed_convergence_sweep,
)
from .scenarios import (
    RunManifest,
    ScenarioConfig,
    config_from_dict,
    default_config,
    run_scenario,
    sweep,
)
from .invariants import run_invariant_suite

__all__ = [name for name in dir() if not name.startswith("_")]
