import numpy as np
import pytest
import scipy.linalg as sla
from numpy.polynomial import Polynomial
from numpy.testing import assert_allclose

from elastica_fem import (BoundaryConditions, ConstraintVariant, HermiteCurve,
                          Mesh1D, assemble_constraint, assemble_matrices,
                          bending_energy, interp_j3)
from elastica_fem.experiments import circle_initial, helix_initial, HELIX_FREQ

from conftest import random_graded_mesh

P1, P2 = ConstraintVariant.P1, ConstraintVariant.P2

# reference Hermite basis on [0,1] as exact polynomial algebra; this oracle is
# independent of the Gauss quadrature used in assembly
HERMITE_POLYS = [
    Polynomial([1.0, 0.0, -3.0, 2.0]),
    Polynomial([0.0, 1.0, -2.0, 1.0]),
    Polynomial([0.0, 0.0, 3.0, -2.0]),
    Polynomial([0.0, 0.0, -1.0, 1.0]),
]


def element_matrix_oracle(h: float, order: int) -> np.ndarray:
    out = np.empty((4, 4))
    for a in range(4):
        for b in range(4):
            pa = HERMITE_POLYS[a].deriv(order) if order else HERMITE_POLYS[a]
            pb = HERMITE_POLYS[b].deriv(order) if order else HERMITE_POLYS[b]
            integral = (pa * pb).integ()
            val = integral(1.0) - integral(0.0)
            scale_a = h if a in (1, 3) else 1.0
            scale_b = h if b in (1, 3) else 1.0
            out[a, b] = val * scale_a * scale_b * h ** (1 - 2 * order)
    return out


class TestSystemMatrices:
    def test_single_element_bending_against_oracle(self):
        mesh = Mesh1D.uniform(0.0, 1.0, 1)
        mats = assemble_matrices(mesh, 1)
        S = mats.bending.toarray()
        assert S[0, 0] == pytest.approx(12.0, abs=1e-12)
        assert_allclose(S, element_matrix_oracle(1.0, 2), atol=1e-12)

    @pytest.mark.parametrize("order,key", [(0, "mass"), (1, "gradient"),
                                           (2, "bending")])
    def test_element_blocks_random_mesh(self, rng, order, key):
        mesh = random_graded_mesh(rng, max_elements=6)
        mats = assemble_matrices(mesh, 1)
        full = getattr(mats, key).toarray()
        # accumulate the oracle the same way assembly does
        n = 2 * mesh.nodes.size
        expect = np.zeros((n, n))
        for e, h in enumerate(mesh.element_lengths):
            idx = np.arange(2 * e, 2 * e + 4)
            expect[np.ix_(idx, idx)] += element_matrix_oracle(h, order)
        assert_allclose(full, expect, atol=1e-11 * max(1.0, np.abs(expect).max()))

    def test_mass_total(self):
        mesh = Mesh1D(np.array([0.0, 0.4, 1.1, 3.0]))
        mats = assemble_matrices(mesh, 2)
        ones = HermiteCurve(mesh, 2, np.ones((4, 2)), np.zeros((4, 2))).dofs
        assert mats.quad_mass(ones) == pytest.approx(2 * 3.0, rel=1e-13)
        assert ones @ (mats.mass @ ones) == pytest.approx(2 * 3.0, rel=1e-12)

    def test_bending_annihilates_affine(self, rng):
        mesh = random_graded_mesh(rng, length=2.0)
        for d in (1, 2, 3):
            mats = assemble_matrices(mesh, d)
            slope = rng.normal(size=d)
            offset = rng.normal(size=d)
            vals = offset[None, :] + np.outer(mesh.nodes, slope)
            derivs = np.tile(slope, (mesh.nodes.size, 1))
            dofs = HermiteCurve(mesh, d, vals, derivs).dofs
            assert np.abs(mats.bending @ dofs).max() < 1e-10
            assert mats.quad_bending(dofs) == pytest.approx(0.0, abs=1e-12)

    def test_nullspace_dimensions(self, rng):
        mesh = Mesh1D.uniform(0.0, 1.0, 4)
        for d in (1, 2):
            mats = assemble_matrices(mesh, d)
            n = mats.num_dofs
            assert np.linalg.matrix_rank(mats.bending.toarray(),
                                         tol=1e-9) == n - 2 * d
            assert np.linalg.matrix_rank(mats.gradient.toarray(),
                                         tol=1e-9) == n - d
            eigs = np.linalg.eigvalsh(mats.mass.toarray())
            assert eigs.min() > 0.0

    def test_spd_and_symmetry(self, rng):
        mesh = random_graded_mesh(rng, max_elements=7)
        mats = assemble_matrices(mesh, 2)
        for key in ("mass", "gradient", "bending"):
            A = getattr(mats, key).toarray()
            assert np.array_equal(A, A.T)

    def test_quad_forms_match_sparse(self, rng):
        mesh = random_graded_mesh(rng, max_elements=9)
        mats = assemble_matrices(mesh, 2)
        u = rng.normal(size=mats.num_dofs)
        v = rng.normal(size=mats.num_dofs)
        assert mats.quad_bending(u, v) == pytest.approx(u @ (mats.bending @ v),
                                                        rel=1e-9, abs=1e-9)
        assert mats.quad_mass(u) == pytest.approx(u @ (mats.mass @ u), rel=1e-11)
        assert_allclose(mats.apply_bending(u), mats.bending @ u,
                        atol=1e-8 * max(1.0, np.abs(mats.bending @ u).max()))


class TestBendingEnergy:
    def test_straight_segment_zero(self):
        mesh = Mesh1D.uniform(0.0, 1.0, 3)
        mats = assemble_matrices(mesh, 2)
        vals = np.stack([mesh.nodes, np.zeros(4)], axis=1)
        derivs = np.tile([1.0, 0.0], (4, 1))
        curve = HermiteCurve(mesh, 2, vals, derivs)
        assert bending_energy(curve, mats) == pytest.approx(0.0, abs=1e-14)

    def test_circle_energy_second_order(self):
        z0 = circle_initial()
        errs = []
        for M in (8, 16, 32):
            mesh = Mesh1D.uniform(0.0, 2.0 * np.pi, M)
            mats = assemble_matrices(mesh, 2)
            curve = interp_j3([1.0, 0.0], z0.deriv, mesh, 2)
            errs.append(abs(bending_energy(curve, mats) - np.pi))
        assert errs[0] < 0.06
        assert errs[1] / errs[0] < 0.35 and errs[2] / errs[1] < 0.35

    def test_helix_energy(self):
        z0 = helix_initial()
        length = 2.0 * np.sqrt(np.pi**2 + 1.0)
        target = 0.5 * HELIX_FREQ**4 * length
        mesh = Mesh1D.uniform(0.0, length, 40)
        mats = assemble_matrices(mesh, 3)
        curve = interp_j3(z0.value(np.array([0.0]))[0], z0.deriv, mesh, 3)
        assert bending_energy(curve, mats) == pytest.approx(target, rel=2e-4)


class TestConstraintMatrix:
    def test_straight_line_single_element_p2(self):
        mesh = Mesh1D.uniform(0.0, 1.0, 1)
        Z = HermiteCurve(mesh, 2, [[0.0, 0.0], [1.0, 0.0]],
                         [[1.0, 0.0], [1.0, 0.0]])
        cm = assemble_constraint(Z, P2, BoundaryConditions.free())
        assert cm.num_rows == 3 and cm.num_bc_rows == 0
        # tangent is e1 everywhere: rows pick the first-component derivative
        Y = HermiteCurve(mesh, 2, [[0.0, 0.0], [1.0, 0.0]],
                         [[0.0, 0.0], [0.0, 0.0]])
        by = cm.matrix @ Y.dofs
        assert_allclose(by, [0.0, 1.5, 0.0], atol=1e-14)
        # hand value: u'(1/2) of the cubic with zero values, derivs 2 and 3,
        # is 2 - 14t + 15t^2 at t=1/2, i.e. -1.25
        Y2 = HermiteCurve(mesh, 2, np.zeros((2, 2)), [[2.0, 5.0], [3.0, -1.0]])
        assert_allclose(cm.matrix @ Y2.dofs, [2.0, -1.25, 3.0], atol=1e-14)

    def test_row_counts_p1_clamped(self):
        z0 = circle_initial()
        bc = BoundaryConditions.clamped((1, 0), (0, 1), (1, 0), (0, 1))
        for M in (3, 6, 11):
            mesh = Mesh1D.uniform(0.0, 2.0 * np.pi, M)
            Z = interp_j3([1.0, 0.0], z0.deriv, mesh, 2)
            cm = assemble_constraint(Z, P1, bc)
            # endpoint tangential rows are dropped (derivative fully fixed)
            assert cm.num_tangent_rows == M - 1
            assert cm.num_bc_rows == 8
            assert cm.num_rows == M + 7

    def test_midpoint_row_support(self):
        z0 = circle_initial()
        mesh = Mesh1D.uniform(0.0, 2.0 * np.pi, 5)
        Z = interp_j3([1.0, 0.0], z0.deriv, mesh, 2)
        cm = assemble_constraint(Z, P2, BoundaryConditions.free())
        B = cm.matrix.toarray()
        d = 2
        for row_idx, z_idx in enumerate(cm.tangent_nodes):
            if z_idx % 2 == 1:  # midpoint of element e
                e = (z_idx - 1) // 2
                cols = np.nonzero(B[row_idx])[0]
                lo, hi = 2 * d * e, 2 * d * (e + 2)
                assert cols.size <= 4 * d
                assert np.all((cols >= lo) & (cols < hi))

    def test_kernel_satisfies_pointwise_constraint(self, rng):
        z0 = circle_initial()
        mesh = Mesh1D.uniform(0.0, 2.0 * np.pi, 6)
        Z = interp_j3([1.0, 0.0], z0.deriv, mesh, 2)
        cm = assemble_constraint(Z, P2, BoundaryConditions.free())
        kernel = sla.null_space(cm.matrix.toarray())
        pts = mesh.constraint_nodes(P2)
        for k in range(min(5, kernel.shape[1])):
            Y = HermiteCurve.from_dofs(mesh, 2, kernel[:, k])
            yprime = Y.eval(pts, order=1)  # independent re-evaluation
            zprime = Z.eval(pts, order=1)
            dots = np.einsum("nd,nd->n", yprime, zprime)
            assert np.abs(dots).max() < 1e-10

    def test_circle_rotation_field_in_kernel(self):
        z0 = circle_initial()
        mesh = Mesh1D.uniform(0.0, 2.0 * np.pi, 9)
        Z = interp_j3([1.0, 0.0], z0.deriv, mesh, 2)
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])
        Y = HermiteCurve(mesh, 2, Z.values @ rot.T, Z.derivs @ rot.T)
        cm = assemble_constraint(Z, P2, BoundaryConditions.free())
        assert np.abs(cm.matrix @ Y.dofs).max() < 1e-12

    def test_periodic_rows(self):
        z0 = circle_initial()
        mesh = Mesh1D.uniform(0.0, 2.0 * np.pi, 4)
        Z = interp_j3([1.0, 0.0], z0.deriv, mesh, 2)
        cm = assemble_constraint(Z, P2, BoundaryConditions(periodic=True))
        # tangential row at b dropped; 2d value + 2d derivative tie rows
        assert cm.num_bc_rows == 4
        assert cm.num_tangent_rows == 2 * 4 + 1 - 1
        shift = np.zeros(Z.num_dofs)
        shift[0::4] = 1.0  # constant first-component translation
        assert np.abs(cm.matrix @ shift).max() < 1e-14

    def test_bc_target_validation(self):
        z0 = circle_initial()
        mesh = Mesh1D.uniform(0.0, 2.0 * np.pi, 8)
        Z = interp_j3([1.0, 0.0], z0.deriv, mesh, 2)
        good = BoundaryConditions(value_a=(1.0, 0.0), deriv_a=(0.0, 1.0),
                                  deriv_b=(0.0, 1.0))
        good.validate_initial(Z)
        bad = BoundaryConditions(value_a=(0.0, 0.0), deriv_a=(0.0, 1.0),
                                 deriv_b=(0.0, 1.0))
        with pytest.raises(ValueError, match="value_a"):
            bad.validate_initial(Z)

    def test_periodic_excludes_fixing(self):
        with pytest.raises(ValueError):
            BoundaryConditions(value_a=(0.0, 0.0), periodic=True)
