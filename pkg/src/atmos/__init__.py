"""Oscillations of a polytropic atmosphere touching vacuum.

Equilibria on a solid core, the singular eigenproblem of the linearized
oscillation operator, and linear plus fully nonlinear free-boundary
dynamics in Lagrangian coordinates, with Bessel-function oracles and
verification experiments at desk scale.
"""

__version__ = "0.1.0"

from .params import (ModelParams, EquilibriumProfile, make_params,
                     equilibrium_density, equilibrium_pressure,
                     equilibrium_profile, total_mass, critical_mass)
from .chart import CoordinateChart, make_chart
from .grid import WeightedGrid, make_grid, grid_for_params, inner, \
    weighted_norm
from .operators import (LinearOperatorCoeffs, build_L_coeffs,
                        pure_laplacian_coeffs, laplacian_apply,
                        derivative_ops, lin_operator_apply, operator_matrix,
                        grading_norm, make_discrete_L)
from .bessel import bessel_j, bessel_zero, bessel_oracle_spectrum
from .spectral import (EigenMode, FrobeniusSeed, frobenius_seed,
                       shoot_eigen, collocation_spectrum, shooting_window)
from .nonlinear import (PerturbationPoint, eval_GH, eval_GI_GII,
                        a21_closed_form, a21_from_partials, abc_coeffs)
from .dynamics import (WaveState, LinearModeSolution, EulerField,
                       linear_wave_solve, nonlinear_simulate,
                       euler_reconstruct, period_measure, energy,
                       energy_inequality_check, vacuum_exponent_fit)
from .experiments import (RunConfig, RunReport, load_config,
                          run_epsilon_sweep, run_convergence_study,
                          run_energy_check, emit_report, emit_plots)

__all__ = [
    "ModelParams", "EquilibriumProfile", "make_params",
    "equilibrium_density", "equilibrium_pressure", "equilibrium_profile",
    "total_mass", "critical_mass", "CoordinateChart", "make_chart",
    "WeightedGrid", "make_grid", "grid_for_params", "inner",
    "weighted_norm", "LinearOperatorCoeffs", "build_L_coeffs",
    "pure_laplacian_coeffs", "laplacian_apply", "derivative_ops",
    "lin_operator_apply", "operator_matrix", "grading_norm",
    "make_discrete_L", "bessel_j", "bessel_zero", "bessel_oracle_spectrum",
    "EigenMode", "FrobeniusSeed", "frobenius_seed", "shoot_eigen",
    "collocation_spectrum", "shooting_window", "PerturbationPoint",
    "eval_GH", "eval_GI_GII", "a21_closed_form", "a21_from_partials",
    "abc_coeffs", "WaveState", "LinearModeSolution", "EulerField",
    "linear_wave_solve", "nonlinear_simulate", "euler_reconstruct",
    "period_measure", "energy", "energy_inequality_check",
    "vacuum_exponent_fit", "RunConfig", "RunReport", "load_config",
    "run_epsilon_sweep", "run_convergence_study", "run_energy_check",
    "emit_report", "emit_plots",
]
