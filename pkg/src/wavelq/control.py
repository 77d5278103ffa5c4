"""Optimal state feedback for the discrete-time representation.

The optimal window-to-window feedback is ``u_d(j) = F_d z_d(j)`` with

    F_d = -(I + D* D + B* Pi B)^{-1} (D* C + B* Pi A),

and in continuous time it is the boundary law ``u(t) = lambda0(1) F_d z(1, t)``.
The closed loop is exponentially stable iff ``r(A_d + B_d F_d) < 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .discretize import DiscreteProfile, DiscreteSystem, l2_inner
from .errors import NotOptimizableError
from .riccati import (
    DEFAULT_MAX_ITERS,
    DEFAULT_RICCATI_TOL,
    RiccatiSolution,
    solve_care,
    solve_fare,
    spectral_radius,
)

__all__ = [
    "LqSolution",
    "feedback_gain",
    "closed_loop",
    "closed_loop_from_riccati",
    "synthesize",
    "optimal_cost",
    "sorted_eigenvalues",
]


def _h(a):
    return a.conj().T


def feedback_gain(D: DiscreteSystem, Pi) -> np.ndarray:
    """``F_d`` for a (nonnegative, self-adjoint) Riccati solution ``Pi``."""
    A, B, C, Dd = D.A_d, D.B_d, D.C_d, D.D_d
    Pi = np.asarray(Pi)
    inner = np.eye(D.p) + _h(Dd) @ Dd + _h(B) @ Pi @ B
    cho = sla.cho_factor(inner, lower=True)
    return -sla.cho_solve(cho, _h(Dd) @ C + _h(B) @ Pi @ A)


def closed_loop(D: DiscreteSystem, F_d) -> np.ndarray:
    """``A_d + B_d F_d``."""
    return D.A_d + D.B_d @ np.asarray(F_d)


def closed_loop_from_riccati(D: DiscreteSystem, Pi) -> np.ndarray:
    """The closed-loop matrix written directly in terms of ``Pi``."""
    A, B, C, Dd = D.A_d, D.B_d, D.C_d, D.D_d
    inner = np.eye(D.p) + _h(Dd) @ Dd + _h(B) @ Pi @ B
    return A - B @ np.linalg.solve(inner, _h(Dd) @ C + _h(B) @ Pi @ A)


@dataclass(frozen=True, eq=False)
class LqSolution:
    """Riccati solutions, optimal gain and closed-loop diagnostics."""

    system: DiscreteSystem
    care: RiccatiSolution
    fare: RiccatiSolution
    F_d: np.ndarray
    A_cl: np.ndarray
    closed_loop_radius: float
    open_loop_radius: float

    @property
    def Pi(self) -> np.ndarray:
        return self.care.Pi

    @property
    def Pi_tilde(self) -> np.ndarray:
        return self.fare.Pi

    @property
    def stabilizing(self) -> bool:
        return self.closed_loop_radius < 1.0

    @property
    def unique(self) -> bool:
        # sufficient conditions only: both equations solved and A_cl stable
        return self.care.converged and self.fare.converged and self.stabilizing

    @property
    def closed_loop_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.A_cl)

    def to_dict(self):
        def c(z):
            return [float(np.real(z)), float(np.imag(z))]

        real = lambda a: np.real(a).tolist()
        return {
            "discrete": self.system.to_dict(),
            "Pi": real(self.Pi),
            "Pi_tilde": real(self.Pi_tilde),
            "F_d": real(self.F_d),
            "A_cl": real(self.A_cl),
            "open_loop_eigenvalues": [c(z) for z in sorted_eigenvalues(self.system.A_d)],
            "closed_loop_eigenvalues": [c(z) for z in sorted_eigenvalues(self.A_cl)],
            "open_loop_radius": self.open_loop_radius,
            "closed_loop_radius": self.closed_loop_radius,
            "care": {k: v for k, v in self.care.to_dict().items() if k != "Pi"},
            "fare": {k: v for k, v in self.fare.to_dict().items() if k != "Pi"},
            "stabilizing": self.stabilizing,
            "unique": self.unique,
        }

    def to_json(self, path=None, **kw):
        text = json.dumps(self.to_dict(), **kw)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def sorted_eigenvalues(A):
    ev = np.linalg.eigvals(A)
    # deterministic order: by modulus, then argument
    return sorted(ev, key=lambda z: (-round(abs(z), 12), round(float(np.angle(z)), 12)))


def synthesize(D: DiscreteSystem, tol=DEFAULT_RICCATI_TOL,
               max_iters=DEFAULT_MAX_ITERS) -> LqSolution:
    """Solve both Riccati equations and form the optimal closed loop.

    Raises
    ------
    NotOptimizableError
        If the control Riccati iteration does not converge.
    """
    care = solve_care(D, tol, max_iters)
    if not care.converged:
        raise NotOptimizableError(
            f"control Riccati iteration failed after {care.iterations} steps "
            f"(residual {care.residual:.3e}): no finite-cost input for some initial state"
        )
    fare = solve_fare(D, tol, max_iters)
    F_d = feedback_gain(D, care.Pi)
    A_cl = closed_loop(D, F_d)
    direct = closed_loop_from_riccati(D, care.Pi)
    assert np.allclose(A_cl, direct, rtol=1e-9, atol=1e-9 * (1 + np.abs(A_cl).max())), \
        "closed-loop forms disagree"
    return LqSolution(
        system=D,
        care=care,
        fare=fare,
        F_d=F_d,
        A_cl=A_cl,
        closed_loop_radius=spectral_radius(A_cl),
        open_loop_radius=spectral_radius(D.A_d),
    )


def optimal_cost(Pi, zd0: DiscreteProfile) -> float:
    """``<z_d(0), Pi z_d(0)>`` in ``L2(0, 1)`` (trapezoidal rule).

    This is the optimal value of the summed discrete cost; the
    continuous-time cost is ``period`` times larger.
    """
    Pi = np.asarray(Pi)
    return float(np.real(l2_inner(zd0.grid, zd0.values, zd0.values @ Pi.T)))
