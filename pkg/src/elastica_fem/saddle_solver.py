"""Direct solution of block KKT systems [[A, B^T], [B, 0]]."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class KKTSingularError(RuntimeError):
    """Raised when the KKT matrix is singular or numerically rank deficient.

    ``deficiency`` carries the estimated rank deficiency so callers can
    decide whether dropping redundant constraint rows would help.
    """

    def __init__(self, message: str, deficiency: int):
        super().__init__(message)
        self.deficiency = deficiency


@dataclass
class SaddleSystem:
    """Equality-constrained quadratic system.

    A is n x n symmetric, B is m x n; the block matrix [[A, B^T], [B, 0]] is
    solvable iff B has full row rank and A is definite on ker B.
    ``rhs_bottom`` is zero in every flow step and nonzero in Newton steps.
    """

    A: sp.spmatrix
    B: sp.spmatrix
    rhs_top: np.ndarray
    rhs_bottom: np.ndarray

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A)
        self.B = sp.csr_matrix(self.B)
        self.rhs_top = np.asarray(self.rhs_top, dtype=float).ravel()
        self.rhs_bottom = np.asarray(self.rhs_bottom, dtype=float).ravel()
        n, m = self.A.shape[0], self.B.shape[0]
        if self.A.shape != (n, n) or self.B.shape[1] != n:
            raise ValueError("incompatible block shapes")
        if self.rhs_top.size != n or self.rhs_bottom.size != m:
            raise ValueError("right-hand side does not match block sizes")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[0]


_PIVOT_TOL = 1e-12   # relative pivot threshold flagging rank deficiency
_RESIDUAL_TOL = 1e-10


def _estimate_deficiency(K: np.ndarray) -> int:
    svals = sla.svdvals(K)
    if svals.size == 0:
        return 0
    return int(np.sum(svals < _PIVOT_TOL * svals[0]))


def kkt_residual(system: SaddleSystem, x: np.ndarray, lam: np.ndarray
                 ) -> Tuple[float, float]:
    """Norms of A x + B^T lam - rhs_top and B x - rhs_bottom."""
    top = system.A @ x + system.B.T @ lam - system.rhs_top
    bottom = system.B @ x - system.rhs_bottom
    return float(np.linalg.norm(top)), float(np.linalg.norm(bottom))


def _dense_solve(system: SaddleSystem) -> Tuple[np.ndarray, np.ndarray]:
    n, m = system.n, system.m
    K = np.zeros((n + m, n + m))
    K[:n, :n] = system.A.toarray()
    Bd = system.B.toarray()
    K[:n, n:] = Bd.T
    K[n:, :n] = Bd
    rhs = np.concatenate([system.rhs_top, system.rhs_bottom])
    with warnings.catch_warnings():
        # singularity is diagnosed from the pivots below
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(K)
    pivots = np.abs(np.diag(lu))
    if pivots.max() == 0.0 or pivots.min() < _PIVOT_TOL * pivots.max():
        raise KKTSingularError(
            "KKT matrix numerically rank deficient", _estimate_deficiency(K))
    sol = sla.lu_solve((lu, piv), rhs)
    sol += sla.lu_solve((lu, piv), rhs - K @ sol)  # one refinement pass
    return sol[:n], sol[n:]


def solve_kkt(system: SaddleSystem, tol_rel: float = _RESIDUAL_TOL
              ) -> Tuple[np.ndarray, np.ndarray]:
    """Solve the block system; returns (x, lam).

    Sparse LU with one step of iterative refinement; a dense factorization
    with pivot diagnostics takes over when the sparse path fails or leaves a
    residual above tol_rel times the right-hand-side norm.
    """
    if system.m == 0:
        x = spla.spsolve(system.A.tocsc(), system.rhs_top)
        return np.atleast_1d(x), np.zeros(0)

    K = sp.bmat([[system.A, system.B.T], [system.B, None]], format="csc")
    rhs = np.concatenate([system.rhs_top, system.rhs_bottom])
    rhs_norm = np.linalg.norm(rhs)
    try:
        lu = spla.splu(K)
        pivots = np.abs(lu.U.diagonal())
        if pivots.min() < _PIVOT_TOL * pivots.max():
            # consistent singular systems can leave a small residual while
            # carrying an arbitrary kernel component; defer to the dense
            # path, which diagnoses the deficiency
            sol = None
        else:
            sol = lu.solve(rhs)
            sol += lu.solve(rhs - K @ sol)
    except RuntimeError:
        sol = None

    if sol is not None and np.all(np.isfinite(sol)):
        res = np.linalg.norm(K @ sol - rhs)
        if res <= tol_rel * max(rhs_norm, 1e-300):
            return sol[:system.n], sol[system.n:]

    x, lam = _dense_solve(system)
    top, bottom = kkt_residual(system, x, lam)
    res = np.hypot(top, bottom)
    if res > tol_rel * max(rhs_norm, 1e-300):
        raise KKTSingularError(
            f"KKT solve residual {res:.3e} exceeds {tol_rel:.1e} * |rhs|",
            _estimate_deficiency(np.asarray(
                sp.bmat([[system.A, system.B.T], [system.B, None]]).todense())))
    return x, lam


class SchurSolver:
    """Schur-complement path that factorizes A once and reuses it while the
    constraint block changes every step.

    Intended for long flows where A = M + tau*S is constant; requires A to be
    nonsingular (it is symmetric positive definite in the L2 flow).
    """

    def __init__(self, A: sp.spmatrix):
        self.A = sp.csc_matrix(A)
        self._lu = spla.splu(self.A)

    def solve(self, B: sp.spmatrix, rhs_top: np.ndarray,
              rhs_bottom: Optional[np.ndarray] = None
              ) -> Tuple[np.ndarray, np.ndarray]:
        B = sp.csr_matrix(B)
        m = B.shape[0]
        if rhs_bottom is None:
            rhs_bottom = np.zeros(m)
        y0 = self._lu.solve(rhs_top)
        if m == 0:
            return y0, np.zeros(0)
        Y = self._lu.solve(B.T.toarray())
        schur = B @ Y
        try:
            c, low = sla.cho_factor(schur)
            lam = sla.cho_solve((c, low), B @ y0 - rhs_bottom)
        except np.linalg.LinAlgError as exc:
            raise KKTSingularError(
                "Schur complement not positive definite",
                _estimate_deficiency(schur)) from exc
        x = y0 - Y @ lam
        return x, lam
