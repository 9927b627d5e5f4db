"""Constrained gradient-flow time stepping for the bending energy.

Each step linearizes the inextensibility constraint about the previous
iterate and solves one saddle-point system

    [[A, B^T], [B, 0]] (d_t Z, Lambda) = (-S Z^n, 0),

with A = M + tau*S for the L2 flow or A = (1 + tau)*S for the H2 flow, then
updates Z^{n+1} = Z^n + tau * d_t Z^{n+1}.  No projection or renormalization
is applied between steps; the constraint violation is monitored only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .assembly import (BoundaryConditions, SystemMatrices, assemble_constraint,
                       assemble_matrices)
from .mesh import ConstraintVariant, Mesh1D
from .saddle_solver import SaddleSystem, solve_kkt
from .splines import (FunctionOracle, HermiteCurve, interp_j2, interp_j3,
                      unit_speed_violation)


class FlowSolveError(RuntimeError):
    """Solver failure with the step index attached."""

    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"saddle solve failed at flow step {step_index}: {cause}")
        self.step_index = step_index


@dataclass
class FlowConfig:
    tau: float
    T: float
    variant: str = "l2"                      # "l2" or "h2"
    constraint: ConstraintVariant = ConstraintVariant.P2
    bc: BoundaryConditions = None
    stationarity_tol: float = 0.0            # 0 disables early stopping

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("time step must be positive")
        if self.T < 0.0:
            raise ValueError("final time must be nonnegative")
        if self.variant not in ("l2", "h2"):
            raise ValueError(f"unknown flow variant: {self.variant!r}")
        if self.bc is None:
            self.bc = BoundaryConditions.free()

    @property
    def num_steps(self) -> int:
        # t_n = n*tau only fills [0, T] exactly for divisors; round otherwise
        return int(round(self.T / self.tau))


@dataclass
class FlowState:
    n: int
    curve: HermiteCurve
    energy: float
    last_velocity_norm: float
    constraint_violation: float
    max_identity_violation: float = 0.0
    max_constraint_residual: float = 0.0


def init_state(z0: FunctionOracle, mesh: Mesh1D, dim: int,
               constraint: ConstraintVariant, initializer: str = "j3",
               matrices: Optional[SystemMatrices] = None) -> FlowState:
    """Initial flow state.

    "j3": cubic initializer whose derivative interpolates z0' at nodes and
    midpoints; satisfies the P2 constraint exactly when z0 is unit speed.
    "j2": piecewise-quadratic initializer (linear derivative interpolant);
    satisfies the P1 constraint exactly.
    """
    if z0.deriv is None:
        raise ValueError("flow initialization needs the derivative of z0")
    pts = mesh.constraint_nodes(constraint)
    speeds = np.linalg.norm(np.atleast_2d(
        np.asarray(z0.deriv(pts), dtype=float).reshape(pts.size, -1)), axis=1)
    worst = float(np.abs(speeds - 1.0).max())
    if worst > 1e-8:
        raise ValueError(
            f"initial curve is not unit speed at a constraint node: |error| = {worst:.3e}")

    start = np.asarray(z0.value(np.array([mesh.a])), dtype=float).reshape(dim)
    if initializer == "j3":
        curve = interp_j3(start, z0.deriv, mesh, dim)
    elif initializer == "j2":
        curve = interp_j2(start, z0.deriv, mesh, dim)
    else:
        raise ValueError(f"unknown initializer: {initializer!r}")

    if matrices is None:
        matrices = assemble_matrices(mesh, dim)
    return FlowState(
        n=0,
        curve=curve,
        energy=0.5 * matrices.quad_bending(curve.dofs),
        last_velocity_norm=float("nan"),
        constraint_violation=unit_speed_violation(curve, constraint),
    )


def _system_matrix(config: FlowConfig, matrices: SystemMatrices) -> sp.csr_matrix:
    if config.variant == "l2":
        return (matrices.mass + config.tau * matrices.bending).tocsr()
    return ((1.0 + config.tau) * matrices.bending).tocsr()


def step(state: FlowState, config: FlowConfig, matrices: SystemMatrices,
         system_matrix: Optional[sp.csr_matrix] = None) -> FlowState:
    """One time step; returns the new state.

    The energy-decrease identity of the scheme is monitored: for the L2 flow
    E(Z^{n+1}) = E(Z^n) - tau*|v|_L2^2 - (tau^2/2)*|v''|_L2^2 with v the
    discrete velocity, and analogously with the H2 product for the H2 flow.
    """
    Z = state.curve
    tau = config.tau
    constraint = assemble_constraint(Z, config.constraint, config.bc)
    A = system_matrix if system_matrix is not None else _system_matrix(config, matrices)
    rhs_top = -matrices.apply_bending(Z.dofs)
    system = SaddleSystem(A, constraint.matrix, rhs_top,
                          np.zeros(constraint.num_rows))
    try:
        v, _ = solve_kkt(system)
    except Exception as exc:
        raise FlowSolveError(state.n, exc) from exc

    # pin fixed (or periodicity-tied) DOFs of the velocity exactly
    if config.bc.periodic:
        dim = Z.dim
        last = 2 * dim * (Z.mesh.nodes.size - 1)
        v[last:last + 2 * dim] = v[:2 * dim]
    else:
        fixed = config.bc.fixed_dof_indices(Z.mesh, Z.dim)
        if fixed.size:
            v[fixed] = 0.0

    new_dofs = Z.dofs + tau * v
    new_curve = HermiteCurve.from_dofs(Z.mesh, Z.dim, new_dofs)

    v_mass = matrices.quad_mass(v)
    v_bend = matrices.quad_bending(v)
    new_energy = 0.5 * matrices.quad_bending(new_dofs)
    if config.variant == "l2":
        identity_err = abs(new_energy - state.energy + tau * v_mass
                           + 0.5 * tau**2 * v_bend)
    else:
        identity_err = abs(new_energy - state.energy + (tau + 0.5 * tau**2) * v_bend)
    identity_err /= max(1.0, abs(state.energy))

    tang = constraint.matrix[:constraint.num_tangent_rows] @ v
    constraint_res = float(np.abs(tang).max()) if tang.size else 0.0

    return FlowState(
        n=state.n + 1,
        curve=new_curve,
        energy=new_energy,
        last_velocity_norm=float(np.sqrt(max(v_mass, 0.0))),
        constraint_violation=unit_speed_violation(new_curve, config.constraint),
        max_identity_violation=max(state.max_identity_violation, identity_err),
        max_constraint_residual=max(state.max_constraint_residual, constraint_res),
    )


def run(config: FlowConfig, mesh: Mesh1D, z0: FunctionOracle, dim: int,
        initializer: str = "j3", matrices: Optional[SystemMatrices] = None,
        snapshot_stride: int = 0
        ) -> Tuple[FlowState, List[Tuple[int, HermiteCurve]]]:
    """Run the flow for round(T/tau) steps (or until the velocity norm drops
    below ``stationarity_tol`` when that is positive).

    Returns the final state and, for a positive ``snapshot_stride``, the list
    of (step index, curve) snapshots including the initial curve.
    """
    if matrices is None:
        matrices = assemble_matrices(mesh, dim)
    state = init_state(z0, mesh, dim, config.constraint, initializer, matrices)
    config.bc.validate_initial(state.curve)
    A = _system_matrix(config, matrices)

    snapshots: List[Tuple[int, HermiteCurve]] = []
    if snapshot_stride > 0:
        snapshots.append((0, state.curve))
    for _ in range(config.num_steps):
        state = step(state, config, matrices, system_matrix=A)
        if snapshot_stride > 0 and state.n % snapshot_stride == 0:
            snapshots.append((state.n, state.curve))
        if config.stationarity_tol > 0.0 and \
                state.last_velocity_norm <= config.stationarity_tol:
            break
    if snapshot_stride > 0 and (not snapshots or snapshots[-1][0] != state.n):
        snapshots.append((state.n, state.curve))
    return state, snapshots


def dump_trajectory(snapshots: List[Tuple[int, HermiteCurve]], tau: float,
                    path: str, points_per_element: int = 10) -> None:
    """Plain-text snapshot blocks: rows "x u1 u2 [u3]", blank-line separated."""
    with open(path, "w") as fh:
        for n, curve in snapshots:
            mesh = curve.mesh
            t = np.linspace(0.0, 1.0, points_per_element, endpoint=False)
            x = (mesh.nodes[:-1, None] + np.outer(mesh.element_lengths, t)).ravel()
            x = np.append(x, mesh.b)
            vals = curve.eval(x)
            fh.write(f"# step {n} t={n * tau:.6g}\n")
            for xi, row in zip(x, vals):
                fh.write(" ".join(f"{v:.12g}" for v in (xi, *row)) + "\n")
            fh.write("\n")
