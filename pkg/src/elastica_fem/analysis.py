"""Error norms against known exact solutions and convergence-order tools."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .assembly import SystemMatrices
from .mesh import Mesh1D
from .splines import FunctionOracle, HermiteCurve, interp_hermite

_CLAMP_WARN = -1e-12  # squared errors below this trigger a cancellation warning


@dataclass
class ExactSolution:
    """A known stationary curve: oracle for u and u', the analytic value of
    the integral of |u''|^2, and (optionally) the multiplier -|u''|^2."""

    oracle: FunctionOracle
    h2_seminorm_sq: float
    multiplier: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def unit_speed_error(self, mesh: Mesh1D, samples_per_element: int = 7) -> float:
        """max | |u'|^2 - 1 | over a sample grid; exact solutions must be
        arc-length parameterized."""
        t = np.linspace(0.0, 1.0, samples_per_element)
        x = (mesh.nodes[:-1, None] + np.outer(mesh.element_lengths, t)).ravel()
        d = np.atleast_2d(np.asarray(self.oracle.deriv(x), dtype=float))
        if d.ndim == 1:
            d = d[:, None]
        return float(np.abs(np.einsum("nd,nd->n", d, d) - 1.0).max())


def h2_error(Z: HermiteCurve, exact: ExactSolution,
             matrices: SystemMatrices) -> float:
    """H2 seminorm of u - Z via the identity
    |u - Z|^2 = |u|^2 + |Z|^2 - 2 * (interpolant of u)'' : Z''
    which avoids quadrature of the exact solution.

    The three-term combination cancels almost completely when Z is nearly
    exact; small negative values are clamped at zero and anything below
    -1e-12 is reported as a warning.
    """
    dofs = Z.dofs
    ui = interp_hermite(exact.oracle, Z.mesh, Z.dim).dofs
    val = exact.h2_seminorm_sq + matrices.quad_bending(dofs) \
        - 2.0 * matrices.quad_bending(dofs, ui)
    if val < _CLAMP_WARN:
        warnings.warn(f"squared H2 error {val:.3e} clamped to zero "
                      "(cancellation below the roundoff budget)")
    return float(np.sqrt(max(val, 0.0)))


def weak_errors(Z: HermiteCurve, exact: ExactSolution,
                matrices: SystemMatrices) -> tuple:
    """(L2 norm, H1 seminorm) of the interpolated error: the cubic C1 curve
    whose nodal values/derivatives are u(x_i) - Z(x_i), u'(x_i) - Z'(x_i)."""
    mesh = Z.mesh
    u_vals = np.atleast_2d(np.asarray(exact.oracle.value(mesh.nodes), dtype=float)
                           ).reshape(mesh.nodes.size, Z.dim)
    u_ders = np.atleast_2d(np.asarray(exact.oracle.deriv(mesh.nodes), dtype=float)
                           ).reshape(mesh.nodes.size, Z.dim)
    e = HermiteCurve(mesh, Z.dim, u_vals - Z.values, u_ders - Z.derivs).dofs
    l2 = np.sqrt(max(matrices.quad_mass(e), 0.0))
    h1 = np.sqrt(max(matrices.quad_gradient(e), 0.0))
    return float(l2), float(h1)


def eoc(errors: Sequence[float], hs: Sequence[float]) -> List[float]:
    """Experimental orders of convergence between consecutive rows."""
    if len(errors) != len(hs) or len(errors) < 2:
        raise ValueError("need two or more matching error/h entries")
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if np.any(errors <= 0.0) or np.any(hs <= 0.0):
        raise ValueError("errors and mesh sizes must be positive")
    return [float(np.log(errors[i] / errors[i + 1]) / np.log(hs[i] / hs[i + 1]))
            for i in range(len(errors) - 1)]


def fit_rate(errors: Sequence[float], hs: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(h)."""
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if np.any(errors <= 0.0) or np.any(hs <= 0.0):
        raise ValueError("errors and mesh sizes must be positive")
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


_GAUSS10_T, _GAUSS10_W = np.polynomial.legendre.leggauss(10)


def quadrature_error(curve: HermiteCurve, f_deriv: Callable, order: int,
                     points: int = 10) -> float:
    """L2 norm of (order-th derivative of curve) - f_deriv by composite Gauss
    quadrature; independent of the Gram-matrix error formulas."""
    if points == 10:
        tq, wq = _GAUSS10_T, _GAUSS10_W
    else:
        tq, wq = np.polynomial.legendre.leggauss(points)
    mesh = curve.mesh
    t = 0.5 * (tq + 1.0)
    x = (mesh.nodes[:-1, None] + np.outer(mesh.element_lengths, t)).ravel()
    diff = curve.eval(x, order) - np.atleast_2d(
        np.asarray(f_deriv(x), dtype=float)).reshape(x.size, curve.dim)
    sq = np.einsum("nd,nd->n", diff, diff).reshape(mesh.num_elements, t.size)
    per_elem = sq @ (0.5 * wq)
    return float(np.sqrt(np.dot(mesh.element_lengths, per_elem)))


def linf_error(curve: HermiteCurve, f: Callable, order: int = 0,
               samples_per_element: int = 30) -> float:
    """max |curve^(order) - f| over a sample grid."""
    mesh = curve.mesh
    t = np.linspace(0.0, 1.0, samples_per_element)
    x = np.unique((mesh.nodes[:-1, None] + np.outer(mesh.element_lengths, t)).ravel())
    diff = curve.eval(x, order) - np.atleast_2d(
        np.asarray(f(x), dtype=float)).reshape(x.size, curve.dim)
    return float(np.abs(diff).max())
