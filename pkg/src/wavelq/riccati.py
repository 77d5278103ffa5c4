"""Discrete-time Riccati and Lyapunov equations for the exact recursion.

The control equation (CARE) is

    A* P A - P + C* C = (C* D + A* P B)(I + D* D + B* P B)^{-1}(D* C + B* P A)

and the filter equation (FARE) is the same equation for the dual data
``(A*, C*, B*, D*)``.  Both are solved by value iteration from ``P = 0``,
which converges monotonically to the smallest nonnegative solution whenever
one exists and diverges otherwise.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .discretize import DiscreteSystem
from .errors import RiccatiFault

__all__ = [
    "RiccatiSolution",
    "LyapunovSolution",
    "solve_care",
    "solve_fare",
    "value_iteration",
    "care_residual",
    "fare_residual",
    "solve_output_lyapunov",
    "solve_input_lyapunov",
    "solve_stein",
    "spectral_radius",
    "DEFAULT_RICCATI_TOL",
    "DEFAULT_MAX_ITERS",
]

log = logging.getLogger(__name__)

DEFAULT_RICCATI_TOL = 1e-13
DEFAULT_MAX_ITERS = 100_000
RESIDUAL_TOL = 1e-8
NONNEG_TOL = 1e-10
_BLOWUP = 1e150


def _h(a):
    return a.conj().T


def _hermitian_part(a):
    return 0.5 * (a + _h(a))


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """Outcome of a value iteration.

    ``residual`` is the Frobenius norm of the equation defect at ``Pi``;
    ``converged`` requires both a stalled iteration and a small residual.
    """

    Pi: np.ndarray
    residual: float
    iterations: int
    converged: bool
    kind: str = "care"

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.Pi).min())

    @property
    def nonnegative(self) -> bool:
        return self.min_eigenvalue >= -NONNEG_TOL * max(1.0, np.linalg.norm(self.Pi))

    def to_dict(self):
        return {
            "Pi": np.real(self.Pi).tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def care_residual(D: DiscreteSystem, Pi) -> float:
    """Frobenius norm of ``lhs - rhs`` of the control Riccati equation."""
    A, B, C, Dd = D.A_d, D.B_d, D.C_d, D.D_d
    Pi = np.asarray(Pi)
    lhs = _h(A) @ Pi @ A - Pi + _h(C) @ C
    left = _h(C) @ Dd + _h(A) @ Pi @ B
    inner = np.eye(D.p) + _h(Dd) @ Dd + _h(B) @ Pi @ B
    rhs = left @ np.linalg.solve(inner, _h(left))
    return float(np.linalg.norm(lhs - rhs, "fro"))


def fare_residual(D: DiscreteSystem, Pi_tilde) -> float:
    """Frobenius norm of the filter Riccati equation defect."""
    return care_residual(D.dual(), Pi_tilde)


def value_iteration(D: DiscreteSystem, tol=DEFAULT_RICCATI_TOL, max_iters=DEFAULT_MAX_ITERS,
                    callback=None):
    """Iterate the Riccati map from zero.

    Returns ``(Pi, iterations, stalled)``.  ``callback(k, Pi_k)`` sees every
    iterate, starting with ``Pi_0 = 0``.
    """
    A, B, C, Dd = D.A_d, D.B_d, D.C_d, D.D_d
    dtype = np.result_type(A, B, C, Dd, float)
    Q = _h(C) @ C
    S = _h(Dd) @ C
    R = np.eye(D.p, dtype=dtype) + _h(Dd) @ Dd
    Ah, Bh = _h(A), _h(B)
    Pi = np.zeros((D.n, D.n), dtype=dtype)
    if callback is not None:
        callback(0, Pi)
    for k in range(1, max_iters + 1):
        N = S + Bh @ Pi @ A
        # inner matrix is >= I, so Cholesky cannot fail
        cho = sla.cho_factor(R + Bh @ Pi @ B, lower=True, check_finite=False)
        nxt = Ah @ Pi @ A + Q - _h(N) @ sla.cho_solve(cho, N, check_finite=False)
        scale = 1.0 + np.linalg.norm(nxt)
        if not np.isfinite(scale) or scale > _BLOWUP:
            log.debug("Riccati iteration diverged at step %d", k)
            return nxt, k, False
        asym = np.linalg.norm(nxt - _h(nxt)) / scale
        if asym > 1e-8:
            raise RiccatiFault(f"iterate lost symmetry (relative defect {asym:.2e}) at step {k}")
        nxt = _hermitian_part(nxt)
        if callback is not None:
            callback(k, nxt)
        if np.linalg.norm(nxt - Pi) < tol * (1.0 + np.linalg.norm(Pi)):
            return nxt, k, True
        Pi = nxt
    return Pi, max_iters, False


def solve_care(D: DiscreteSystem, tol=DEFAULT_RICCATI_TOL, max_iters=DEFAULT_MAX_ITERS,
               residual_tol=RESIDUAL_TOL, kind="care") -> RiccatiSolution:
    """Smallest nonnegative self-adjoint solution of the control equation.

    A run that does not converge is reported with ``converged=False``; by the
    finite-cost characterization this means the system is not optimizable.
    """
    Pi, its, stalled = value_iteration(D, tol, max_iters)
    if np.all(np.isfinite(Pi)):
        res = care_residual(D, Pi)
    else:
        res = float("inf")
    ok = bool(stalled and res <= residual_tol * (1.0 + np.linalg.norm(Pi)))
    return RiccatiSolution(Pi, res, its, ok, kind)


def solve_fare(D: DiscreteSystem, tol=DEFAULT_RICCATI_TOL, max_iters=DEFAULT_MAX_ITERS,
               residual_tol=RESIDUAL_TOL) -> RiccatiSolution:
    """Filter equation, solved as the control equation of the dual system."""
    return solve_care(D.dual(), tol, max_iters, residual_tol, kind="fare")


@dataclass(frozen=True, eq=False)
class LyapunovSolution:
    """Solution of a Stein equation ``F* X F - X + W = 0``.

    ``exists`` means a nonnegative solution was found; ``conclusive`` is
    false when the vectorized operator is singular, in which case ``L`` is
    only a least-squares candidate.
    """

    L: np.ndarray
    residual: float
    exists: bool
    conclusive: bool = True

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(_hermitian_part(self.L)).min())


def solve_stein(F, W, rcond=1e-10) -> LyapunovSolution:
    """Solve ``F* X F - X + W = 0`` through its Kronecker form."""
    F = np.asarray(F)
    W = np.asarray(W)
    n = F.shape[0]
    # column-major vec: vec(F* X F) = (F^T kron F*) vec(X)
    op = np.kron(F.T, _h(F)) - np.eye(n * n)
    rhs = -W.reshape(-1, order="F")
    sv = np.linalg.svd(op, compute_uv=False)
    singular = sv.min() <= rcond * max(sv.max(), 1.0)
    if singular:
        x = np.linalg.lstsq(op, rhs, rcond=None)[0]
    else:
        x = np.linalg.solve(op, rhs)
    X = _hermitian_part(x.reshape(n, n, order="F"))
    res = float(np.linalg.norm(_h(F) @ X @ F - X + W, "fro"))
    if singular:
        return LyapunovSolution(X, res, False, False)
    lam_min = np.linalg.eigvalsh(X).min()
    nonneg = lam_min >= -NONNEG_TOL * max(1.0, np.linalg.norm(X))
    return LyapunovSolution(X, res, bool(nonneg), True)


def solve_output_lyapunov(D: DiscreteSystem) -> LyapunovSolution:
    """Observation equation ``A* L A - L + C* C = 0`` (output stability)."""
    return solve_stein(D.A_d, _h(D.C_d) @ D.C_d)


def solve_input_lyapunov(D: DiscreteSystem) -> LyapunovSolution:
    """Control equation ``A L A* - L + B B* = 0`` (input stability)."""
    return solve_stein(_h(D.A_d), D.B_d @ _h(D.B_d))


def spectral_radius(A) -> float:
    """Largest eigenvalue modulus (LAPACK Hessenberg-QR via numpy)."""
    A = np.atleast_2d(np.asarray(A))
    if A.shape[0] != A.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if A.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(A)).max())
