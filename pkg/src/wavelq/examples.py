"""Benchmark plants: a star of three vibrating strings and a co-current
heat exchanger, with the closed-form oracles available for the latter."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .model import HyperbolicSystem, MatrixField, ScalarField, SpatialGrid, StateProfile

__all__ = [
    "StringsParams",
    "HeatExchangerParams",
    "build_strings",
    "build_heat_exchanger",
    "riemann_block",
    "strings_state_from_physical",
    "strings_physical_from_state",
    "STRINGS_TRACE_ORDER",
    "heat_exchanger_P_closed_form",
    "heat_exchanger_care_closed_form",
    "care_closed_form_from_output",
    "heat_exchanger_closed_loop_eigenvalue",
    "heat_exchanger_temperatures",
    "heat_exchanger_state_from_temperatures",
]

# ----------------------------------------------------------------------------
# three strings joined by a massless bar


@dataclass(frozen=True)
class StringsParams:
    """Identical strings with mass density ``rho`` and Young's modulus ``T``."""

    rho: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        if not (self.rho > 0 and self.T > 0):
            raise ValueError("rho and T must be positive")

    @property
    def v(self) -> float:
        return math.sqrt(self.T / self.rho)

    @property
    def sigma(self) -> float:
        return 1.0 / math.sqrt(self.rho * self.T)


def _strings_matrices(s):
    K = np.array([
        [0, s, 0, 0, 0, 0],
        [-s, 0, s, 0, 0, 0],
        [0, 0, -s, 0, s, 0],
        [-1, 0, 1, 0, 1, 0],
        [0, 0, 0, -1, 0, 0],
        [0, 0, 0, 0, 0, -1],
    ], dtype=float)
    L = np.array([
        [-s, 0, 0, 0, 0, 0],
        [0, s, 0, -s, 0, 0],
        [0, 0, 0, s, 0, -s],
        [0, -1, 0, 1, 0, 1],
        [0, 0, -1, 0, 0, 0],
        [0, 0, 0, 0, -1, 0],
    ], dtype=float)
    Ky = np.array([[0, 0, 0, 0, -s, 0], [0, 0, 0, s, 0, 0]], dtype=float)
    Ly = np.array([[0, 0, 0, 0, 0, s], [0, 0, -s, 0, 0, 0]], dtype=float)
    return K, L, Ky, Ly


def build_strings(params: StringsParams = StringsParams(), grid_cells: int = 256) -> HyperbolicSystem:
    """Six Riemann coordinates, three boundary forces, two velocity sensors.

    State ordering is ``(z1~, z2, z3~, z4, z5~, z6)`` where the tilde marks
    components reflected in space (``z~(zeta) = z(1 - zeta)``) so that every
    wave travels from 0 to 1 at speed ``v``.  Inputs are the force on the
    bar and the forces at the free ends of strings B and C; outputs are the
    bar velocity and the velocity of string B at its end.
    """
    grid = SpatialGrid(grid_cells)
    K, L, Ky, Ly = _strings_matrices(params.sigma)
    return HyperbolicSystem(
        lambda0=ScalarField.constant(grid, params.v),
        coupling=MatrixField.zeros(grid, 6),
        K=K, L=L, Ky=Ky, Ly=Ly, p=3,
        meta={"name": "strings", "params": {"rho": params.rho, "T": params.T}},
    )


def riemann_block(sigma: float) -> np.ndarray:
    """Per-string map from ``(rho w_t, w_zeta)`` to Riemann coordinates."""
    return np.array([[0.5, 0.5 / sigma], [-0.5, 0.5 / sigma]])


_REFLECTED = (0, 2, 4)

# Which end of each physical (unreflected) Riemann coordinate the optimal
# feedback reads: the boundary law acts on the state at zeta = 1 after
# reflection, i.e. on z1, z3, z5 at 0 and on z2, z4, z6 at 1.
STRINGS_TRACE_ORDER = (("z1", 0.0), ("z2", 1.0), ("z3", 0.0), ("z4", 1.0), ("z5", 0.0), ("z6", 1.0))


def strings_state_from_physical(x: StateProfile, params: StringsParams) -> StateProfile:
    """Physical profile ``(rho w_t, w_zeta)`` per string to the model state."""
    S = np.kron(np.eye(3), riemann_block(params.sigma))
    z = x.values @ S.T
    z[:, _REFLECTED] = z[::-1, _REFLECTED]
    return StateProfile(x.grid, z)


def strings_physical_from_state(z: StateProfile, params: StringsParams) -> StateProfile:
    """Inverse of :func:`strings_state_from_physical`."""
    vals = np.array(z.values, copy=True)
    vals[:, _REFLECTED] = vals[::-1, _REFLECTED]
    Sinv = np.kron(np.eye(3), np.linalg.inv(riemann_block(params.sigma)))
    return StateProfile(z.grid, vals @ Sinv.T)


# ----------------------------------------------------------------------------
# co-current heat exchanger

Coefficient = Union[float, Callable[[float], float]]


def _as_func(c: Coefficient):
    if callable(c):
        return c
    value = float(c)
    return lambda z: value


@dataclass(frozen=True)
class HeatExchangerParams:
    """Heat-transfer coefficients and flow velocity, constants or callables.

    ``alpha1`` couples the inner tube to the outer one and ``alpha2`` the
    reverse; both must be nonnegative and the velocity positive on [0, 1].
    """

    alpha1: Coefficient = 1.0
    alpha2: Coefficient = 1.0
    v: Coefficient = 1.0

    def funcs(self):
        return _as_func(self.alpha1), _as_func(self.alpha2), _as_func(self.v)

    def check(self, grid: SpatialGrid):
        a1, a2, v = self.funcs()
        z = grid.nodes
        if min(v(x) for x in z) <= 0:
            raise ValueError("velocity must be positive")
        if min(min(a1(x), a2(x)) for x in z) < 0:
            raise ValueError("heat-transfer coefficients must be nonnegative")

    @property
    def is_constant(self) -> bool:
        return not any(callable(c) for c in (self.alpha1, self.alpha2, self.v))


def build_heat_exchanger(params: HeatExchangerParams = HeatExchangerParams(),
                         grid_cells: int = 256) -> HyperbolicSystem:
    """Inlet temperature of the outer tube as input, its rise as output.

    The state is the temperature pair divided by the velocity,
    ``(T_i, T_e) / v``; :func:`heat_exchanger_temperatures` maps back.
    """
    grid = SpatialGrid(grid_cells)
    params.check(grid)
    a1, a2, v = params.funcs()

    def coupling(z):
        return np.array([[-a1(z), a1(z)], [a2(z), -a2(z)]])

    meta = {"name": "heat-exchanger"}
    if params.is_constant:
        meta["params"] = {"alpha1": float(params.alpha1), "alpha2": float(params.alpha2),
                          "v": float(params.v)}
    return HyperbolicSystem(
        lambda0=ScalarField.from_callable(grid, v),
        coupling=MatrixField.from_callable(grid, coupling),
        K=-np.eye(2),
        L=np.zeros((2, 2)),
        Ky=np.array([[0.0, 1.0]]),
        Ly=np.array([[0.0, -1.0]]),
        p=1,
        meta=meta,
    )


def heat_exchanger_P_closed_form(params: HeatExchangerParams, zeta: float,
                                 cells: int = 1024) -> np.ndarray:
    """Explicit ``P(zeta)`` built from ``h(eta) = -int_0^eta (a1 + a2)/v``.

    The integrals are evaluated by composite Simpson quadrature with
    ``cells`` subintervals of ``[0, zeta]``.
    """
    if not 0.0 <= zeta <= 1.0:
        raise ValueError("zeta must lie in [0, 1]")
    if zeta == 0.0:
        return np.eye(2)
    cells += cells % 2
    a1, a2, v = params.funcs()
    eta = np.linspace(0.0, zeta, cells + 1)
    A1 = np.array([a1(x) / v(x) for x in eta])
    A2 = np.array([a2(x) / v(x) for x in eta])
    h = -cumulative_simpson(A1 + A2, x=eta, initial=0.0)
    eh = np.exp(h)
    I1 = simpson(eh * A1, x=eta)
    I2 = simpson(eh * A2, x=eta)
    e = eh[-1]
    return np.array([[1.0 - I1, 1.0 - e - I2], [1.0 - e - I1, 1.0 - I2]])


def care_closed_form_from_output(C_d) -> np.ndarray:
    """Control Riccati solution for ``A_d = 0, B_d = e2, D_d = -1`` and row ``C_d``."""
    c = np.asarray(C_d, dtype=float).reshape(2)
    r1, rt, r2 = c[0] ** 2, c[0] * c[1], c[1] ** 2
    pi2 = (r2 - 2.0 + math.sqrt(r2 * r2 + 4.0)) / 2.0
    f = 1.0 - 1.0 / (2.0 + pi2)
    return np.array([[r1 * f, rt * f], [rt * f, pi2]])


def heat_exchanger_care_closed_form(params: HeatExchangerParams, cells: int = 1024) -> np.ndarray:
    """Closed-form ``Pi`` with ``C_d`` taken from the closed-form ``P(1)``."""
    C_d = heat_exchanger_P_closed_form(params, 1.0, cells)[1]
    return care_closed_form_from_output(C_d)


def heat_exchanger_closed_loop_eigenvalue(C_d) -> float:
    """Nonzero closed-loop eigenvalue ``kappa / (2 + pi2)`` with signed ``kappa``."""
    c = np.asarray(C_d, dtype=float).reshape(2)
    pi2 = care_closed_form_from_output(c)[1, 1]
    return c[1] / (2.0 + pi2)


def heat_exchanger_temperatures(profile: StateProfile, sys: HyperbolicSystem) -> StateProfile:
    """Temperatures ``(T_i, T_e) = v * state`` (original variables)."""
    v = np.interp(profile.grid.nodes, sys.grid.nodes, sys.lambda0.values)
    return StateProfile(profile.grid, profile.values * v[:, None])


def heat_exchanger_state_from_temperatures(T: StateProfile, sys: HyperbolicSystem) -> StateProfile:
    v = np.interp(T.grid.nodes, sys.grid.nodes, sys.lambda0.values)
    return StateProfile(T.grid, T.values / v[:, None])
