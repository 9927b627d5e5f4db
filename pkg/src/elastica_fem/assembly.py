"""Assembly of mass/bending/first-order matrices, bending energy, and the
linearized-constraint matrix including boundary-condition rows."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .mesh import ConstraintVariant, Mesh1D
from .splines import HermiteCurve, _hermite_reference

_GAUSS4_T, _GAUSS4_W = np.polynomial.legendre.leggauss(4)
# mapped to [0,1]; longdouble so elementwise quadratic forms keep ~19 digits
_QT = (0.5 * (_GAUSS4_T + 1.0)).astype(np.longdouble)
_QW = (0.5 * _GAUSS4_W).astype(np.longdouble)


def _reference_gram(order: int) -> np.ndarray:
    """4x4 reference Gram of the t-derivatives of the Hermite basis,
    exact for the polynomial integrands (degree <= 6 vs 4-point Gauss)."""
    basis = _hermite_reference(_QT.astype(float), order).astype(np.longdouble)
    return np.einsum("q,aq,bq->ab", _QW, basis, basis)


def _element_blocks(mesh: Mesh1D, order: int) -> np.ndarray:
    """(M, 4, 4) longdouble element matrices of the order-th derivative
    product, with the physical h-scaling of value/derivative DOFs applied."""
    gram = _reference_gram(order)
    h = mesh.element_lengths.astype(np.longdouble)
    scale = np.ones((h.size, 4), dtype=np.longdouble)
    scale[:, 1] = h
    scale[:, 3] = h
    blocks = gram[None, :, :] * scale[:, :, None] * scale[:, None, :]
    return blocks * h[:, None, None] ** (1 - 2 * order)


def _local_dofs(mesh: Mesh1D, dim: int, dofs: np.ndarray) -> np.ndarray:
    """(M, 4, dim) per-element DOFs ordered (value_L, deriv_L, value_R, deriv_R)."""
    arr = np.asarray(dofs).reshape(mesh.nodes.size, 2 * dim)
    vals, ders = arr[:, :dim], arr[:, dim:]
    out = np.empty((mesh.num_elements, 4, dim), dtype=arr.dtype)
    out[:, 0] = vals[:-1]
    out[:, 1] = ders[:-1]
    out[:, 2] = vals[1:]
    out[:, 3] = ders[1:]
    return out


@dataclass
class SystemMatrices:
    """Mass, bending, and first-order matrices of the cubic C1 space.

    Sparse float64 matrices feed the linear solvers; the stored longdouble
    element blocks provide matrix-vector products and quadratic forms with
    roundoff far below the stationarity tolerances of the flow tests.
    """

    mesh: Mesh1D
    dim: int
    mass: sp.csr_matrix
    bending: sp.csr_matrix
    gradient: sp.csr_matrix
    _blocks: dict = field(repr=False, default_factory=dict)

    @property
    def num_dofs(self) -> int:
        return 2 * self.dim * self.mesh.nodes.size

    def _quad(self, key: str, u: np.ndarray, v: Optional[np.ndarray] = None) -> float:
        blocks = self._blocks[key]
        ul = _local_dofs(self.mesh, self.dim, np.asarray(u, dtype=np.longdouble))
        vl = ul if v is None else _local_dofs(self.mesh, self.dim,
                                              np.asarray(v, dtype=np.longdouble))
        return float(np.einsum("ead,eab,ebd->", ul, blocks, vl))

    def _apply(self, key: str, u: np.ndarray) -> np.ndarray:
        blocks = self._blocks[key]
        ul = _local_dofs(self.mesh, self.dim, np.asarray(u, dtype=np.longdouble))
        contrib = np.einsum("eab,ebd->ead", blocks, ul)
        n = self.mesh.nodes.size
        out = np.zeros((n, 2 * self.dim), dtype=np.longdouble)
        out[:-1, :self.dim] += contrib[:, 0]
        out[:-1, self.dim:] += contrib[:, 1]
        out[1:, :self.dim] += contrib[:, 2]
        out[1:, self.dim:] += contrib[:, 3]
        return out.ravel().astype(float)

    def apply_bending(self, u: np.ndarray) -> np.ndarray:
        """S @ u, accumulated elementwise in extended precision."""
        return self._apply("bending", u)

    def quad_bending(self, u, v=None) -> float:
        """u^T S v (v defaults to u)."""
        return self._quad("bending", u, v)

    def quad_mass(self, u, v=None) -> float:
        return self._quad("mass", u, v)

    def quad_gradient(self, u, v=None) -> float:
        return self._quad("gradient", u, v)

    def h2_gram(self) -> sp.csr_matrix:
        """Gram matrix of the full H2 norm: mass + gradient + bending."""
        return (self.mass + self.gradient + self.bending).tocsr()

    def h2_norm(self, u: np.ndarray) -> float:
        s = self.quad_mass(u) + self.quad_gradient(u) + self.quad_bending(u)
        return float(np.sqrt(max(s, 0.0)))


def assemble_matrices(mesh: Mesh1D, dim: int) -> SystemMatrices:
    """Assemble the three system matrices with elementwise Gauss quadrature
    that is exact for the polynomial integrands; results are symmetrized."""
    n_scalar = 2 * mesh.nodes.size
    e = np.arange(mesh.num_elements)
    local = np.stack([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3], axis=1)  # (M, 4)
    rows = np.repeat(local, 4, axis=1).ravel()
    cols = np.tile(local, (1, 4)).ravel()

    mats = {}
    blocks = {}
    for key, order in (("mass", 0), ("gradient", 1), ("bending", 2)):
        blk = _element_blocks(mesh, order)
        blocks[key] = blk
        a = sp.coo_matrix((blk.astype(float).ravel(), (rows, cols)),
                          shape=(n_scalar, n_scalar)).tocsr()
        a = 0.5 * (a + a.T)
        if dim > 1:
            a = sp.kron(a, sp.eye(dim), format="csr")
        mats[key] = a.tocsr()
    return SystemMatrices(mesh, dim, mats["mass"], mats["bending"],
                          mats["gradient"], blocks)


def bending_energy(curve: HermiteCurve, matrices: SystemMatrices) -> float:
    """One half of the integral of |u''|^2; zero exactly for affine curves."""
    return 0.5 * matrices.quad_bending(curve.dofs)


@dataclass
class BoundaryConditions:
    """Essential conditions at the interval endpoints.

    Each target is a d-vector or None (free).  Targets are only used to
    validate the initial curve of a flow; the flow itself constrains all
    increments at fixed DOFs to zero, so targets never enter a right-hand
    side.  ``periodic`` ties the two endpoints together instead and excludes
    endpoint fixing.
    """

    value_a: Optional[np.ndarray] = None
    deriv_a: Optional[np.ndarray] = None
    value_b: Optional[np.ndarray] = None
    deriv_b: Optional[np.ndarray] = None
    periodic: bool = False

    def __post_init__(self):
        for name in ("value_a", "deriv_a", "value_b", "deriv_b"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.asarray(v, dtype=float).ravel())
        if self.periodic and any(getattr(self, n) is not None for n in
                                 ("value_a", "deriv_a", "value_b", "deriv_b")):
            raise ValueError("periodic boundary conditions exclude endpoint fixing")

    @classmethod
    def free(cls) -> "BoundaryConditions":
        return cls()

    @classmethod
    def clamped(cls, value_a, deriv_a, value_b, deriv_b) -> "BoundaryConditions":
        return cls(value_a=value_a, deriv_a=deriv_a, value_b=value_b, deriv_b=deriv_b)

    def fixed_dof_indices(self, mesh: Mesh1D, dim: int) -> np.ndarray:
        """Indices of DOFs pinned by endpoint conditions (empty if periodic)."""
        last = 2 * dim * (mesh.nodes.size - 1)
        idx = []
        if self.value_a is not None:
            idx.extend(range(0, dim))
        if self.deriv_a is not None:
            idx.extend(range(dim, 2 * dim))
        if self.value_b is not None:
            idx.extend(range(last, last + dim))
        if self.deriv_b is not None:
            idx.extend(range(last + dim, last + 2 * dim))
        return np.array(sorted(idx), dtype=int)

    def validate_initial(self, curve: HermiteCurve) -> None:
        """Check the initial curve against the targets.

        The cumulative-integral initializer reproduces endpoint values at b
        only up to O(h^4), so the value check there carries an h^4 allowance.
        """
        tol = 1e-8
        h = curve.mesh.h
        drift = max(tol, 100.0 * h**4 * (curve.mesh.b - curve.mesh.a))
        checks = [
            ("value_a", curve.values[0], self.value_a, tol),
            ("deriv_a", curve.derivs[0], self.deriv_a, tol),
            ("value_b", curve.values[-1], self.value_b, drift),
            ("deriv_b", curve.derivs[-1], self.deriv_b, tol),
        ]
        for name, got, want, t in checks:
            if want is None:
                continue
            err = float(np.abs(got - want).max())
            if err > t:
                raise ValueError(
                    f"initial curve violates boundary target {name}: |error| = {err:.3e}")


@dataclass
class ConstraintMatrix:
    """Rows of the linearized constraint Y'(z) . t(z) = 0 at the constraint
    nodes, followed by homogeneous boundary-condition rows.

    A tangential row at an endpoint whose derivative is fully fixed (or tied
    by periodicity) is redundant and dropped so the saddle-point matrix stays
    nonsingular.  ``tangent_nodes`` records which constraint-node indices
    kept their row.
    """

    matrix: sp.csr_matrix
    tangent_nodes: np.ndarray
    num_bc_rows: int

    @property
    def num_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_tangent_rows(self) -> int:
        return self.num_rows - self.num_bc_rows


def tangential_rows(Zn: HermiteCurve, variant: ConstraintVariant,
                    keep: Optional[np.ndarray] = None,
                    weights: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """Sparse rows mapping a DOF vector Y to (Y'(z) . t(z))_z with
    t = Zn' at the constraint nodes ``keep`` (default: all).

    ``weights`` optionally scales row z by a positive factor (used for the
    lumped saddle-point form); scaling does not change the kernel.
    """
    mesh, dim = Zn.mesh, Zn.dim
    n = 2 * dim * mesh.nodes.size
    tangents = Zn.derivative_at_constraint_nodes(variant)
    nz = tangents.shape[0]
    if keep is None:
        keep = np.arange(nz)
    if weights is None:
        weights = np.ones(nz)

    rows, cols, data = [], [], []
    if variant is ConstraintVariant.P1:
        node_rows = np.arange(keep.size)
        node_ids = keep
    else:
        is_node = keep % 2 == 0
        node_rows = np.nonzero(is_node)[0]
        node_ids = keep[is_node] // 2
        mid_rows = np.nonzero(~is_node)[0]
        mid_elems = (keep[~is_node] - 1) // 2

    # node rows: Y'(x_i) is the derivative DOF block of node i
    t_n = tangents[keep[node_rows]] * weights[keep[node_rows], None]
    for c in range(dim):
        rows.append(node_rows)
        cols.append(2 * dim * node_ids + dim + c)
        data.append(t_n[:, c])

    if variant is ConstraintVariant.P2 and mid_rows.size:
        h = mesh.element_lengths[mid_elems]
        t_m = tangents[keep[mid_rows]] * weights[keep[mid_rows], None]
        base = 2 * dim * mid_elems
        # Y'(m_i) = (3/2h)(v_R - v_L) - (1/4)(d_L + d_R), per component
        for c in range(dim):
            for offset, coef in ((base + c, -1.5 / h),
                                 (base + dim + c, np.full(h.size, -0.25)),
                                 (base + 2 * dim + c, 1.5 / h),
                                 (base + 3 * dim + c, np.full(h.size, -0.25))):
                rows.append(mid_rows)
                cols.append(offset)
                data.append(coef * t_m[:, c])

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.concatenate(data)
    return sp.coo_matrix((data, (rows, cols)), shape=(keep.size, n)).tocsr()


def assemble_constraint(Zn: HermiteCurve, variant: ConstraintVariant,
                        bc: BoundaryConditions) -> ConstraintMatrix:
    """Constraint matrix of one flow step: tangential rows at the constraint
    nodes of ``variant`` plus homogeneous boundary rows.  The right-hand side
    of these rows is always zero."""
    mesh, dim = Zn.mesh, Zn.dim
    n = 2 * dim * mesh.nodes.size
    nz = mesh.constraint_nodes(variant).size

    drop = set()
    if bc.deriv_a is not None:
        drop.add(0)
    if bc.deriv_b is not None or bc.periodic:
        drop.add(nz - 1)
    keep = np.array([i for i in range(nz) if i not in drop], dtype=int)

    tang = tangential_rows(Zn, variant, keep=keep)

    bc_rows, bc_cols, bc_data = [], [], []
    r = 0
    last = 2 * dim * (mesh.nodes.size - 1)
    if bc.periodic:
        for block in (0, dim):  # value rows then derivative rows
            for c in range(dim):
                bc_rows.extend([r, r])
                bc_cols.extend([block + c, last + block + c])
                bc_data.extend([1.0, -1.0])
                r += 1
    else:
        for target, base in ((bc.value_a, 0), (bc.deriv_a, dim),
                             (bc.value_b, last), (bc.deriv_b, last + dim)):
            if target is None:
                continue
            for c in range(dim):
                bc_rows.append(r)
                bc_cols.append(base + c)
                bc_data.append(1.0)
                r += 1
    bc_mat = sp.coo_matrix((bc_data, (bc_rows, bc_cols)), shape=(r, n)).tocsr()
    matrix = sp.vstack([tang, bc_mat], format="csr") if r else tang
    return ConstraintMatrix(matrix=matrix, tangent_nodes=keep, num_bc_rows=r)
