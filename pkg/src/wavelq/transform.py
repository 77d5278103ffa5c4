"""Change of variables removing the in-domain coupling ``M``.

``P`` and ``Q`` solve

    P' =  (1/lambda0) M P,   Q' = -(1/lambda0) Q M,   P(0) = Q(0) = I,

and satisfy ``Q = P^{-1}``.  Under ``z = Q z_orig`` the coupled system becomes
pure transport with boundary matrices ``K`` and ``L P(1)``.  Both ODEs are
integrated independently with fixed-step RK4 so that the product defect
``Q P - I`` is a free accuracy diagnostic.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, IntegrationError
from .model import HyperbolicSystem, MatrixField, SpatialGrid, StateProfile, interpolate

__all__ = [
    "TransformData",
    "solve_P",
    "solve_Q",
    "build_transform",
    "to_transport_form",
    "to_transport_variables",
    "DEFAULT_TOL_ODE",
]

log = logging.getLogger(__name__)

DEFAULT_TOL_ODE = 1e-8


def _generator_samples(sys, grid):
    """``M/lambda0`` at the nodes and at the cell midpoints of ``grid``."""
    h = grid.step
    mids = grid.nodes[:-1] + 0.5 * h
    lam_n = interpolate(sys.grid, sys.lambda0.values, grid.nodes)
    lam_m = interpolate(sys.grid, sys.lambda0.values, mids)
    M_n = interpolate(sys.grid, sys.coupling.values, grid.nodes)
    M_m = interpolate(sys.grid, sys.coupling.values, mids)
    return M_n / lam_n[:, None, None], M_m / lam_m[:, None, None]


def _rk4(sys, grid, rhs):
    if grid.num_cells < 2:
        raise ValueError("the ODE grid needs at least 2 cells")
    G_n, G_m = _generator_samples(sys, grid)
    h = grid.step
    n = sys.n
    dtype = np.result_type(G_n, float)
    out = np.empty((grid.size, n, n), dtype=dtype)
    X = np.eye(n, dtype=dtype)
    out[0] = X
    for k in range(grid.num_cells):
        k1 = rhs(G_n[k], X)
        k2 = rhs(G_m[k], X + 0.5 * h * k1)
        k3 = rhs(G_m[k], X + 0.5 * h * k2)
        k4 = rhs(G_n[k + 1], X + h * k3)
        X = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(X)):
            raise IntegrationError(f"non-finite values at zeta={grid.nodes[k + 1]:.6g}")
        out[k + 1] = X
    out.setflags(write=False)
    return out


def solve_P(sys: HyperbolicSystem, grid: SpatialGrid | None = None) -> np.ndarray:
    """Integrate ``P' = M P / lambda0`` from ``P(0) = I``.

    Returns an array of shape ``(N + 1, n, n)`` with ``P`` at every node.
    """
    return _rk4(sys, grid or sys.grid, lambda G, X: G @ X)


def solve_Q(sys: HyperbolicSystem, grid: SpatialGrid | None = None) -> np.ndarray:
    """Integrate ``Q' = -Q M / lambda0`` from ``Q(0) = I``."""
    return _rk4(sys, grid or sys.grid, lambda G, X: -(X @ G))


@dataclass(frozen=True, eq=False)
class TransformData:
    """Sampled ``P``, ``Q`` and the nodewise product defect ``|Q P - I|_F``."""

    grid: SpatialGrid
    P: np.ndarray
    Q: np.ndarray
    defects: np.ndarray
    tol_ode: float = DEFAULT_TOL_ODE

    @property
    def inverse_residual(self) -> float:
        return float(self.defects.max())

    @property
    def within_budget(self) -> bool:
        return self.inverse_residual <= self.tol_ode

    @property
    def P1(self) -> np.ndarray:
        return self.P[-1]

    @property
    def n(self) -> int:
        return self.P.shape[1]

    def to_csv(self, path) -> None:
        """One row per node: zeta, P_ij (row-major), Q_ij, product defect."""
        n = self.n
        idx = [f"{i + 1}{j + 1}" for i in range(n) for j in range(n)]
        header = ["zeta"] + [f"P_{s}" for s in idx] + [f"Q_{s}" for s in idx] + ["defect"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k, z in enumerate(self.grid.nodes):
                row = [z, *self.P[k].ravel(), *self.Q[k].ravel(), self.defects[k]]
                w.writerow([repr(float(np.real(x))) for x in row])


def build_transform(sys: HyperbolicSystem, grid: SpatialGrid | None = None,
                    tol_ode: float = DEFAULT_TOL_ODE) -> TransformData:
    grid = grid or sys.grid
    P = solve_P(sys, grid)
    Q = solve_Q(sys, grid)
    eye = np.eye(sys.n)
    defects = np.linalg.norm(Q @ P - eye, ord="fro", axis=(1, 2))
    defects.setflags(write=False)
    data = TransformData(grid, P, Q, defects, tol_ode)
    if not data.within_budget:
        log.warning("Q P - I defect %.3e exceeds the budget %.1e", data.inverse_residual, tol_ode)
    return data


def to_transport_form(sys: HyperbolicSystem, transform: TransformData) -> HyperbolicSystem:
    """The ``M``-free system for ``z = Q z_orig``.

    Boundary and output matrices become ``K, L P(1), Ky, Ly P(1)``; the
    returned system remembers ``transform`` as its ``state_map``.
    """
    if transform.n != sys.n:
        raise ValueError("transform dimension does not match the system")
    P1 = transform.P1
    return dataclasses.replace(
        sys,
        coupling=MatrixField.zeros(sys.grid, sys.n),
        L=sys.L @ P1,
        Ly=sys.Ly @ P1,
        state_map=transform,
    )


def to_transport_variables(profile: StateProfile, transform: TransformData) -> StateProfile:
    """``z = Q z_orig`` nodewise."""
    if profile.grid != transform.grid:
        raise GridMismatchError("profile and transform grids differ")
    return StateProfile(profile.grid, np.einsum("kij,kj->ki", transform.Q, profile.values))
