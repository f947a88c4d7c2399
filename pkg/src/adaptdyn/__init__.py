"""Numerical lab for a cooperative two-type trait-structured population.

Solves the scaled reaction-diffusion pair with a nonlocal competition
term, exposes the spectral objects of its small-mutation limit
(Hamiltonian fitness, population ratio, principal eigen-pair), builds the
DNA-damage application coefficients, and drives the standard experiments
through a deterministic CSV-emitting runner.
"""

from .coefficients import (
    CoefficientField,
    DnaParams,
    HypothesisReport,
    alpha_kernel,
    alpha_exposure_limit,
    beta_kernel,
    build_dna_coefficients,
    check_hypotheses,
    cos8_environment,
    cumulative_alpha,
    cumulative_beta,
    decay_constants,
    delta2_bounds,
    make_field,
)
from .diagnostics import (
    DiagnosticsReport,
    concentration,
    hj_residual,
    hopf_cole,
    ratio_deviation,
)
from .errors import (
    BlowupError,
    ConfigConflictError,
    DegenerateStateError,
    GridMismatchError,
    HypothesisFailure,
    IntegrandError,
    NumericsError,
    PositivityError,
)
from .experiments import (
    ExperimentConfig,
    compare_runs,
    load_config,
    load_manifest,
    preset_config,
    run_experiment,
    save_config,
)
from .grid import (
    Grid,
    QuadratureSpec,
    default_quadrature,
    integrate_on_grid,
    integrate_semi_infinite,
    make_grid,
)
from .solver import (
    PopulationState,
    SimConfig,
    Trajectory,
    cn_step,
    default_initial_state,
    gaussian_state,
    hopf_cole_gaussian_state,
    simulate,
    solve_effective_scalar,
)
from .spectral import (
    SpectralPoint,
    check_identities,
    effective_fitness_r_infty,
    effective_hamiltonian,
    eigen_residual,
    eigenvector_psi,
    fitness_landscape,
    hamiltonian_fitness,
    ratio_q,
    ratio_q_plus,
    spectral_point,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
