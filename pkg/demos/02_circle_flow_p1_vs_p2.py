"""Node-only versus node-plus-midpoint constraint enforcement.

Runs the constrained gradient flow for the semi-clamped circle on a dyadic
sequence of meshes and tabulates the H2 error of the final curve against the
exact circle.  Enforcing the inextensibility constraint only at the mesh
nodes limits the discrete minimizer to piecewise quadratics and the error to
first order; adding the element midpoints restores the quadratic rate of the
underlying cubic elements.
"""

import numpy as np

from elastica_fem import ConstraintVariant, eoc
from elastica_fem.experiments import emit_csv, named_experiment, run_experiment

MESHES = [10, 20, 40, 80]

for constraint, initializer in ((ConstraintVariant.P2, "j3"),
                                (ConstraintVariant.P1, "j2")):
    spec = named_experiment("circle", constraint=constraint,
                            initializer=initializer, mesh_sizes=MESHES,
                            taus=[0.1], T=50.0)
    table = run_experiment(spec)
    col = table.column("tau=0.1:h2")
    print(f"\nconstraint nodes: {constraint.value}  (initializer {initializer})")
    print(f"{'h':>12} {'H2 error':>12} {'eoc':>6}")
    for h, e, r in zip(table.hs, col.errors, col.eocs):
        print(f"{h:>12.3e} {e:>12.4e} {'--' if r is None else f'{r:>6.2f}'}")
    out = f"circle_{constraint.value}.csv"
    emit_csv(table, out)
    print(f"table written to {out} (+ .meta)")

print("\nThe node-only rate is first order; the midpoint-enforced rate is "
      "second order, matching the interpolation error of the element space.")
