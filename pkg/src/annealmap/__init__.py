"""annealmap: desk-scale quantum-anneal simulation and state-transition
susceptibility mapping for small Ising problems.

Core workflow: reverse-anneal a small Ising from every classical initial
state while an h-gain schedule pulls toward a chosen ground state, sweep
the field strength, and map which states are susceptible to the
transition — plus spectral clustering of the response curves, dominant-
state transition networks, and Pegasus-topology parallel tilings.
"""

__version__ = "0.1.0"

from .ising import (CapabilityError, GroundStateSet, IsingProblem,
                    all_energies, complement, delta_metric, energy,
                    enumerate_ground_states, hamming_distance_proportion,
                    index_to_state, load_instance, random_spin_glass,
                    save_instance, state_to_index)
from .schedule import (AnnealEnvelope, AnnealSpec, PiecewiseLinearSchedule,
                       default_envelope, eval_schedule,
                       forward_anneal_schedule, hgain_plateau_schedule,
                       load_envelope, load_envelope_csv,
                       reverse_anneal_schedule, validate_hgain_schedule)
from .simulator import (BackendConfig, IntegrationError, RunPresets,
                        SampleSet, build_hamiltonian, encode_target_state,
                        evolve, forward_anneal_run, propagator,
                        reverse_anneal_run, sample, svmc_evolve)
from .analysis import (ClusterAssignment, HGrid, ResponseCurve,
                       SusceptibilityRecord, average_chi_per_gs, chi,
                       gs_distribution, pearson, pgs, spectral_cluster,
                       susceptibility_record, sweep_response_curve)
from .network import (DominantPath, TransitionNetwork, build_path,
                      dominant_state, export_network, parse_network,
                      union_network)
from .topology import (EmbeddingSet, HardwareGraph, pegasus_graph,
                       tile_disjoint_embeddings, validate_embeddings)
from .instances import BUNDLED_NAMES, EXPECTED_GROUND_STATES, \
    bundled_instance
from .config import ClusteringParams, ConfigError, ExperimentConfig, \
    load_config

__all__ = [
    "__version__",
    # ising
    "CapabilityError", "GroundStateSet", "IsingProblem", "all_energies",
    "complement", "delta_metric", "energy", "enumerate_ground_states",
    "hamming_distance_proportion", "index_to_state", "load_instance",
    "random_spin_glass", "save_instance", "state_to_index",
    # schedule
    "AnnealEnvelope", "AnnealSpec", "PiecewiseLinearSchedule",
    "default_envelope", "eval_schedule", "forward_anneal_schedule",
    "hgain_plateau_schedule", "load_envelope", "load_envelope_csv",
    "reverse_anneal_schedule", "validate_hgain_schedule",
    # simulator
    "BackendConfig", "IntegrationError", "RunPresets", "SampleSet",
    "build_hamiltonian", "encode_target_state", "evolve",
    "forward_anneal_run", "propagator", "reverse_anneal_run", "sample",
    "svmc_evolve",
    # analysis
    "ClusterAssignment", "HGrid", "ResponseCurve", "SusceptibilityRecord",
    "average_chi_per_gs", "chi", "gs_distribution", "pearson", "pgs",
    "spectral_cluster", "susceptibility_record", "sweep_response_curve",
    # network
    "DominantPath", "TransitionNetwork", "build_path", "dominant_state",
    "export_network", "parse_network", "union_network",
    # topology
    "EmbeddingSet", "HardwareGraph", "pegasus_graph",
    "tile_disjoint_embeddings", "validate_embeddings",
    # instances
    "BUNDLED_NAMES", "EXPECTED_GROUND_STATES", "bundled_instance",
    # config
    "ClusteringParams", "ConfigError", "ExperimentConfig", "load_config",
]
