"""Numerics for the liberation of two symmetries by free unitary Brownian motion.

The package follows the pair (R, S) of self-adjoint symmetries while S is
rotated by a free unitary Brownian motion: moment ODE, spectral transforms,
characteristic flow with subordination, the bridge to projection pairs, and
a finite matrix model used as an independent oracle.
"""

from .bridge import (binomial_rows, invert_projected_moments,
                     measure_mu_from_nu, measure_nu_from_mu,
                     project_moments, projection_atom_masses, sigma_from_nu)
from .errors import DomainError, NumericalHealthError, ValidationError
from .measures import (CircleMeasure, IntervalMeasure, MomentSequence,
                       TraceParams, bernoulli_symmetry_law, circle_to_interval,
                       interval_to_circle, moments_from_measure,
                       quadrature_weights)
from .moments import (MomentTrajectory, evolve_moments, fixed_point_residual,
                      moment_ode_rhs, source_terms, stationary_moments)
from .rmt import (EnsembleConfig, MomentTable, achieved_trace, build_pair,
                  empirical_moments, evolve_unitary, haar_unitary,
                  monte_carlo)
from .subordination import (FlowState, domain_boundary, eta_inverse,
                            flow_identity_drift, flow_lifetime, flow_ode,
                            phi_closed_form, subordination_check)
from .transforms import (HerglotzEvaluator, K_eval, L_eval, cauchy_eval,
                         classical_evaluator, density_from_boundary,
                         free_evaluator, herglotz_eval, initial_moments,
                         moebius_part, pde_residual, pde_source,
                         point_mass_pi, point_mass_zero,
                         regularized_taylor_coefficients, s_transform_pipeline,
                         series_evaluator, stationary_arc_density,
                         stationary_decomposition, stationary_evaluator)

__version__ = "0.1.0"

__all__ = [
    "DomainError", "NumericalHealthError", "ValidationError",
    "TraceParams", "MomentSequence", "CircleMeasure", "IntervalMeasure",
    "bernoulli_symmetry_law", "moments_from_measure", "quadrature_weights",
    "interval_to_circle", "circle_to_interval",
    "MomentTrajectory", "evolve_moments", "stationary_moments",
    "moment_ode_rhs", "source_terms", "fixed_point_residual",
    "HerglotzEvaluator", "series_evaluator", "stationary_evaluator",
    "free_evaluator", "classical_evaluator", "point_mass_zero",
    "point_mass_pi", "initial_moments", "herglotz_eval", "moebius_part",
    "K_eval", "L_eval", "cauchy_eval", "stationary_arc_density",
    "stationary_decomposition", "density_from_boundary",
    "regularized_taylor_coefficients", "pde_source", "pde_residual",
    "s_transform_pipeline",
    "FlowState", "flow_ode", "flow_identity_drift", "phi_closed_form",
    "flow_lifetime", "eta_inverse", "subordination_check", "domain_boundary",
    "binomial_rows", "project_moments", "invert_projected_moments",
    "projection_atom_masses", "measure_nu_from_mu", "measure_mu_from_nu",
    "sigma_from_nu",
    "EnsembleConfig", "MomentTable", "achieved_trace", "haar_unitary",
    "evolve_unitary", "build_pair", "empirical_moments", "monte_carlo",
]
