"""Finite elements for bending-energy stationary points of inextensible
curves: C1 cubic splines, node-only or node-plus-midpoint constraint
enforcement, gradient flows, Newton solvers, and convergence studies."""

from .mesh import ConstraintVariant, Mesh1D
from .splines import (FunctionOracle, HermiteCurve, QuadraticField,
                      interp_hermite, interp_j2, interp_j3, interp_linear,
                      interp_quadratic, lumped_product, lumped_weights,
                      unit_speed_violation, zero_boundary)
from .assembly import (BoundaryConditions, ConstraintMatrix, SystemMatrices,
                       assemble_constraint, assemble_matrices, bending_energy)
from .saddle_solver import (KKTSingularError, SaddleSystem, SchurSolver,
                            kkt_residual, solve_kkt)
from .flow import (FlowConfig, FlowSolveError, FlowState, dump_trajectory,
                   init_state, run, step)
from .analysis import (ExactSolution, eoc, fit_rate, h2_error, linf_error,
                       quadrature_error, weak_errors)
from .stationary import (DiscreteNorms, NewtonError, SaddlePoint,
                         coercivity_estimate, infsup_estimate,
                         make_interpolant_pair, multiplier_dofs,
                         multiplier_field, newton_solve, residual,
                         residual_dual_norm)
from .stationary import jacobian as stationary_jacobian
from .experiments import (ExperimentSpec, ExperimentTable, emit_csv,
                          named_experiment, run_experiment,
                          stationarity_check)

__version__ = "0.1.0"

__all__ = [
    "BoundaryConditions", "ConstraintMatrix", "ConstraintVariant",
    "DiscreteNorms", "ExactSolution", "ExperimentSpec", "ExperimentTable",
    "FlowConfig", "FlowSolveError", "FlowState", "FunctionOracle",
    "HermiteCurve", "KKTSingularError", "Mesh1D", "NewtonError",
    "QuadraticField", "SaddlePoint", "SaddleSystem", "SchurSolver",
    "SystemMatrices", "assemble_constraint", "assemble_matrices",
    "bending_energy", "coercivity_estimate", "dump_trajectory", "emit_csv",
    "eoc", "fit_rate", "h2_error", "infsup_estimate", "init_state",
    "interp_hermite", "interp_j2", "interp_j3", "interp_linear",
    "interp_quadratic", "kkt_residual", "linf_error", "lumped_product",
    "lumped_weights", "make_interpolant_pair", "multiplier_dofs",
    "multiplier_field", "named_experiment", "newton_solve",
    "quadrature_error", "residual", "residual_dual_norm", "run",
    "run_experiment", "solve_kkt", "stationarity_check",
    "stationary_jacobian", "step", "unit_speed_violation", "weak_errors",
    "zero_boundary",
]
