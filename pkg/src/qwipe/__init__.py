"""Coherence of a qubit coupled to a rapidly replaced thermal environment qubit."""

from ._kernels import backend
from .analytic import (
    ClosedFormCoefficients,
    CoherenceSeries,
    DecoherenceFactors,
    ModelParams,
    closed_form_coefficients,
    decoherence_factors,
    eta_closed,
    eta_limit_p1,
    eta_series,
    initial_rho1,
    ising_hamiltonian,
    polarization,
    recurrence_series,
    thermal_sigma,
)
from .channel import (
    BipartiteState,
    DissipationParams,
    EvolutionConfig,
    NumericalFailure,
    coherence_of,
    evolve,
    replacement_weight,
    step,
)
from .experiments import (
    ConvergenceReport,
    SweepSpec,
    compare_discrete_analytic,
    convergence_order,
    sweep_eta,
    sweep_factors,
)

__version__ = "0.1.0"
