"""Noise-assisted excitation transport on dissipative quantum networks."""

from .entanglement import Bipartition, log_negativity, log_negativity_from_coherences, negativity_timeseries
from .fcn import (
    CollectiveState,
    fcn_final_state,
    fcn_psink_disorder,
    fcn_psink_infinity,
    fcn_psink_laplace,
    fcn_psink_noiseless_quadrature,
    fcn_psink_relaxation,
    fcn_reduced_evolve,
    fcn_rhoNN,
    laplace_delta,
)
from .invariant import InvariantAnalysis, find_invariant_subspace, predict_psink
from .ladder import LadderSpec, ladder_broadened_ensemble, ladder_evolve, ladder_psink
from .network import (
    FMO_OPTIMAL_DEPHASING,
    ExcitonState,
    Generator,
    NetworkSpec,
    SpecError,
    build_generator,
    fcn_preset,
    fmo_preset,
    load_network,
    save_network,
    spec_from_json,
)
from .optimizer import dephasing_sensitivity, optimize_dephasing, robustness_sweep, transfer_efficiency
from .propagator import IntegrationError, Trajectory, evolve, psink_at, steady_state_psink

__version__ = "0.1.0"
