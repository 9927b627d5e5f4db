"""Discrete stationarity of the circle initializers, and energy monotonicity.

The cubic initializer (derivative interpolated at nodes and midpoints) is an
exact discrete stationary point under the midpoint-enforced constraint; the
piecewise-quadratic initializer is stationary under the node-only constraint.
Mixing them (cubic initializer, node-only constraint) produces genuine motion
towards the piecewise-quadratic minimizer.  Every step of the flow obeys an
exact energy-decrease identity, which the run tracks.
"""

import numpy as np

from elastica_fem import (ConstraintVariant, FlowConfig, Mesh1D,
                          assemble_matrices)
from elastica_fem.experiments import named_experiment, stationarity_check
from elastica_fem.flow import run

P1, P2 = ConstraintVariant.P1, ConstraintVariant.P2

print("First-step velocity norms on the circle (M = 20):")
for constraint, initializer in ((P2, "j3"), (P1, "j2"), (P1, "j3")):
    v = stationarity_check("circle", constraint, initializer, mesh_size=20)
    verdict = "stationary" if v < 1e-9 else "moves"
    print(f"  constraint={constraint.value} initializer={initializer}: "
          f"|dtZ| = {v:.3e}  ({verdict})")

print("\nRelaxation of the node-only flow from the cubic initializer:")
spec = named_experiment("circle")
mesh = Mesh1D.uniform(0.0, 2.0 * np.pi, 20)
mats = assemble_matrices(mesh, 2)
cfg = FlowConfig(tau=0.1, T=50.0, constraint=P1, bc=spec.bc)
state, _ = run(cfg, mesh, spec.z0, 2, initializer="j3", matrices=mats)
print(f"  after {state.n} steps: energy {state.energy:.8f} "
      f"(pi = {np.pi:.8f}), |dtZ| = {state.last_velocity_norm:.2e}")
print(f"  worst energy-identity violation: {state.max_identity_violation:.2e}")
print(f"  worst linearized-constraint residual: {state.max_constraint_residual:.2e}")
print("  the flow settles on the piecewise-quadratic minimizer, whose energy"
      " is slightly below that of the cubic initializer")
