"""Exact discrete-time representation of the transport system.

Along characteristics the state is ``z(zeta, t) = f(k(zeta) + t / p(1)) /
lambda0(zeta)`` with

    p(zeta) = int_0^zeta dn / lambda0(n),     k(zeta) = 1 - p(zeta) / p(1).

Cutting ``f`` into unit-length windows ``z_d(j)(xi) = f(j + xi)`` turns the
boundary conditions into the matrix recursion

    z_d(j+1) = A_d z_d(j) + B_d u_d(j),    y_d(j) = C_d z_d(j) + D_d u_d(j),

applied pointwise in ``xi``; one step lasts one transport period ``p(1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.integrate import cumulative_trapezoid

from .errors import WellPosednessError
from .model import (
    K_RCOND,
    HyperbolicSystem,
    SpatialGrid,
    StateProfile,
    interpolate,
    validate_system,
)

__all__ = [
    "ClockTables",
    "DiscreteSystem",
    "DiscreteProfile",
    "Discretization",
    "build_clock",
    "invert_k",
    "build_discrete",
    "lift_initial_condition",
    "index_signal",
    "signal_time",
    "discretize_system",
    "l2_inner",
    "l2_norm_sq",
]


@dataclass(frozen=True, eq=False)
class ClockTables:
    """Travel time ``p`` and normalized clock ``k`` at every grid node."""

    grid: SpatialGrid
    p_values: np.ndarray
    k_values: np.ndarray

    @property
    def period(self) -> float:
        return float(self.p_values[-1])

    def k(self, zeta):
        return interpolate(self.grid, self.k_values, zeta)

    def p(self, zeta):
        return interpolate(self.grid, self.p_values, zeta)


def build_clock(sys: HyperbolicSystem, grid: SpatialGrid | None = None) -> ClockTables:
    """Trapezoidal quadrature of ``1/lambda0`` on ``grid``."""
    grid = grid or sys.grid
    lam = interpolate(sys.grid, sys.lambda0.values, grid.nodes)
    if np.any(lam <= 0):
        raise ValueError("lambda0 must be positive")
    p = cumulative_trapezoid(1.0 / lam, grid.nodes, initial=0.0)
    k = 1.0 - p / p[-1]
    k[-1] = 0.0
    p.setflags(write=False)
    k.setflags(write=False)
    return ClockTables(grid, p, k)


def invert_k(clock: ClockTables, xi):
    """Solve ``k(zeta) = xi`` on the piecewise-linear clock table.

    Accepts a scalar or an array of targets in ``[0, 1]``.
    """
    xa = np.asarray(xi, dtype=float)
    if np.any(xa < 0.0) or np.any(xa > 1.0) or np.any(np.isnan(xa)):
        raise ValueError("xi must lie in [0, 1]")
    kv = clock.k_values
    N = clock.grid.num_cells
    # -k is increasing, so a binary search brackets the target cell
    i = np.clip(np.searchsorted(-kv, -xa, side="right") - 1, 0, N - 1)
    k0, k1 = kv[i], kv[i + 1]
    theta = np.clip((xa - k0) / (k1 - k0), 0.0, 1.0)
    z0, z1 = clock.grid.nodes[i], clock.grid.nodes[i + 1]
    zeta = (1.0 - theta) * z0 + theta * z1
    return float(zeta) if zeta.ndim == 0 else zeta


def index_signal(t: float, clock_or_period):
    """Split time ``t`` into a step index and a position in the window.

    Returns ``(j, xi)`` with ``t = (j + xi) * period`` and ``0 <= xi < 1``.
    """
    period = clock_or_period.period if isinstance(clock_or_period, ClockTables) else float(clock_or_period)
    if t < 0:
        raise ValueError("time must be nonnegative")
    s = t / period
    j = math.floor(s)
    return j, s - j


def signal_time(j: int, xi: float, clock_or_period) -> float:
    period = clock_or_period.period if isinstance(clock_or_period, ClockTables) else float(clock_or_period)
    return (j + xi) * period


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Matrices of the discrete-time recursion and its step length."""

    A_d: np.ndarray
    B_d: np.ndarray
    C_d: np.ndarray
    D_d: np.ndarray
    period: float = 1.0

    def __post_init__(self):
        mats = {}
        for name in ("A_d", "B_d", "C_d", "D_d"):
            a = np.atleast_2d(np.asarray(getattr(self, name)))
            if a.dtype.kind not in "fc":
                a = a.astype(float)
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite entries")
            a = a.copy()
            a.setflags(write=False)
            mats[name] = a
            object.__setattr__(self, name, a)
        n, p, m = mats["A_d"].shape[0], mats["B_d"].shape[1], mats["C_d"].shape[0]
        expected = {"A_d": (n, n), "B_d": (n, p), "C_d": (m, n), "D_d": (m, p)}
        for name, shape in expected.items():
            if mats[name].shape != shape:
                raise ValueError(f"{name} has shape {mats[name].shape}, expected {shape}")
        if not self.period > 0:
            raise ValueError("period must be positive")
        object.__setattr__(self, "period", float(self.period))

    @property
    def n(self) -> int:
        return self.A_d.shape[0]

    @property
    def p(self) -> int:
        return self.B_d.shape[1]

    @property
    def m(self) -> int:
        return self.C_d.shape[0]

    def dual(self) -> "DiscreteSystem":
        """``(A_d*, C_d*, B_d*, D_d*)``, whose CARE is the filter equation."""
        h = lambda a: a.conj().T
        return DiscreteSystem(h(self.A_d), h(self.C_d), h(self.B_d), h(self.D_d), self.period)

    def scaled_cost(self, lam: float) -> "DiscreteSystem":
        """Data whose LQ problem is the original one with the cost times ``lam``.

        Uses ``C -> sqrt(lam) C`` and ``B -> B / sqrt(lam)`` with the input
        rescaled accordingly; ``A_d`` and ``D_d`` are unchanged.
        """
        r = math.sqrt(lam)
        return DiscreteSystem(self.A_d, self.B_d / r, self.C_d * r, self.D_d, self.period)

    def to_dict(self):
        if any(np.iscomplexobj(a) for a in (self.A_d, self.B_d, self.C_d, self.D_d)):
            raise ValueError("JSON export supports real matrices only")
        return {
            "A_d": self.A_d.tolist(),
            "B_d": self.B_d.tolist(),
            "C_d": self.C_d.tolist(),
            "D_d": self.D_d.tolist(),
            "period": self.period,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["A_d"], doc["B_d"], doc["C_d"], doc["D_d"], doc.get("period", 1.0))

    def to_json(self, path=None, **kw):
        text = json.dumps(self.to_dict(), **kw)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def l2_inner(grid: SpatialGrid, a, b):
    """Trapezoidal ``int_0^1 a(x)* b(x) dx`` for nodal vector samples."""
    a = np.asarray(a)
    b = np.asarray(b)
    integrand = np.einsum("ki,ki->k", a.conj(), b)
    w = np.full(grid.size, grid.step)
    w[0] = w[-1] = 0.5 * grid.step
    return w @ integrand


def l2_norm_sq(grid: SpatialGrid, a) -> float:
    return float(np.real(l2_inner(grid, a, a)))


_ROLES = ("state", "input", "output")


@dataclass(frozen=True, eq=False)
class DiscreteProfile:
    """A window ``z_d(j)``, ``u_d(j)`` or ``y_d(j)`` sampled on ``[0, 1]``."""

    grid: SpatialGrid
    values: np.ndarray
    role: str = "state"
    index: int = 0

    def __post_init__(self):
        if self.role not in _ROLES:
            raise ValueError(f"role must be one of {_ROLES}")
        if self.index < 0:
            raise ValueError("step index must be nonnegative")
        v = np.asarray(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.size:
            raise ValueError(f"profile needs {self.grid.size} node samples, got {v.shape[0]}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid, vector, role="state", index=0):
        vec = np.atleast_1d(np.asarray(vector))
        return cls(grid, np.broadcast_to(vec, (grid.size, vec.size)), role, index)

    @classmethod
    def zeros(cls, grid, dim, role="state", index=0):
        return cls(grid, np.zeros((grid.size, dim)), role, index)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __call__(self, xi):
        return interpolate(self.grid, self.values, xi)


def build_discrete(sys: HyperbolicSystem, P1=None, clock: ClockTables | None = None,
                   rcond: float = K_RCOND) -> DiscreteSystem:
    """Matrices ``A_d, B_d, C_d, D_d`` of the exact discrete-time system.

    ``sys`` carries the original boundary matrices and ``P1`` is ``P(1)``
    from :func:`wavelq.transform.build_transform`.  For a system without
    in-domain coupling (including one returned by ``to_transport_form``,
    whose ``L`` already absorbs ``P(1)``) leave ``P1`` unset.
    """
    n = sys.n
    if P1 is None:
        if not sys.coupling.is_zero:
            raise ValueError("system has in-domain coupling: pass P1 = P(1)")
        P1 = np.eye(n)
    else:
        P1 = np.asarray(P1)
        if P1.shape != (n, n):
            raise ValueError(f"P1 has shape {P1.shape}, expected {(n, n)}")
        if sys.state_map is not None and not np.allclose(P1, np.eye(n)):
            raise ValueError("system is already in transport form; P(1) would be applied twice")
    report = validate_system(sys, rcond)
    if not report.k_invertible:
        raise WellPosednessError(
            f"K is singular (smin/smax = {report.k_singular_ratio:.3e} <= {rcond:g})"
        )
    if clock is None:
        clock = build_clock(sys)
    lu = sla.lu_factor(sys.K)
    Kinv_LP = sla.lu_solve(lu, sys.L @ P1)
    Kinv_G = sla.lu_solve(lu, sys.input_selector)
    A_d = -Kinv_LP
    B_d = -Kinv_G
    C_d = sys.Ky @ Kinv_LP - sys.Ly @ P1
    D_d = sys.Ky @ Kinv_G
    return DiscreteSystem(A_d, B_d, C_d, D_d, clock.period)


def lift_initial_condition(z0: StateProfile, sys: HyperbolicSystem,
                           clock: ClockTables | None = None) -> DiscreteProfile:
    """The first window ``z_d(0)`` defined by ``z_d(0)(k(zeta)) = lambda0(zeta) z0(zeta)``."""
    clock = clock or build_clock(sys)
    grid = clock.grid
    zeta = invert_k(clock, grid.nodes)
    lam = interpolate(sys.grid, sys.lambda0.values, zeta)
    vals = lam[:, None] * interpolate(z0.grid, z0.values, zeta)
    return DiscreteProfile(grid, vals, "state", 0)


@dataclass(frozen=True, eq=False)
class Discretization:
    """Everything the control and simulation stages need from a plant."""

    system: HyperbolicSystem
    transform: object
    transport: HyperbolicSystem
    clock: ClockTables
    discrete: DiscreteSystem


def discretize_system(sys: HyperbolicSystem, grid: SpatialGrid | None = None,
                      tol_ode: float | None = None) -> Discretization:
    """Transform, clock and discrete matrices for ``sys`` in one call."""
    from .transform import DEFAULT_TOL_ODE, build_transform, to_transport_form

    grid = grid or sys.grid
    tr = build_transform(sys, grid, DEFAULT_TOL_ODE if tol_ode is None else tol_ode)
    transport = to_transport_form(sys, tr)
    clock = build_clock(sys, grid)
    disc = build_discrete(sys, tr.P1, clock)
    return Discretization(sys, tr, transport, clock, disc)
