"""Exact propagation of the discrete-time recursion on spatial profiles.

One step of the recursion advances the transport system by exactly one
period ``p(1)``: there is no time stepping, no CFL limit and no numerical
dissipation.  Continuous-time states are recovered along characteristics
from the stored windows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .discretize import (
    ClockTables,
    DiscreteProfile,
    DiscreteSystem,
    l2_norm_sq,
)
from .errors import GridMismatchError, InstabilityError
from .model import HyperbolicSystem, SpatialGrid, StateProfile, interpolate

__all__ = [
    "Trajectory",
    "step",
    "simulate_closed_loop",
    "simulate_open_loop",
    "cost_discrete",
    "default_horizon",
    "decay_rate",
    "reconstruct_profile",
    "to_original_variables",
    "boundary_control_signal",
    "reconstruction_to_csv",
    "BLOWUP_NORM",
]

BLOWUP_NORM = 1e30
MAX_HORIZON = 100_000


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Windows ``z_d(0..J)``, ``u_d(0..J-1)`` and ``y_d(0..J-1)``.

    Arrays are indexed ``[j, node, component]``.
    """

    system: DiscreteSystem
    grid: SpatialGrid
    states: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    transform: object = None

    @property
    def horizon(self) -> int:
        return self.inputs.shape[0]

    @property
    def period(self) -> float:
        return self.system.period

    def state(self, j) -> DiscreteProfile:
        return DiscreteProfile(self.grid, self.states[j], "state", j)

    def input(self, j) -> DiscreteProfile:
        return DiscreteProfile(self.grid, self.inputs[j], "input", j)

    def output(self, j) -> DiscreteProfile:
        return DiscreteProfile(self.grid, self.outputs[j], "output", j)

    @property
    def steps(self):
        return [(self.state(j), self.input(j), self.output(j)) for j in range(self.horizon)]

    def state_norms(self) -> np.ndarray:
        """``L2(0, 1)`` norm of every stored state window."""
        return np.array([math.sqrt(l2_norm_sq(self.grid, z)) for z in self.states])

    def recursion_defect(self) -> float:
        """Largest nodewise violation of the state and output equations."""
        D = self.system
        if self.horizon == 0:
            return 0.0
        Z, U = self.states[:-1], self.inputs
        dz = self.states[1:] - (Z @ D.A_d.T + U @ D.B_d.T)
        dy = self.outputs - (Z @ D.C_d.T + U @ D.D_d.T)
        return float(max(np.abs(dz).max(), np.abs(dy).max()))

    def to_csv(self, path) -> None:
        """Columns ``j, zeta, z_1..z_n, u_1..u_p, y_1..y_m``.

        The final state window ``z_d(J)`` is written with empty input and
        output cells.
        """
        D = self.system
        header = (["j", "zeta"] + [f"z_{i + 1}" for i in range(D.n)]
                  + [f"u_{i + 1}" for i in range(D.p)] + [f"y_{i + 1}" for i in range(D.m)])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for j in range(self.horizon + 1):
                for k, xi in enumerate(self.grid.nodes):
                    row = [str(j), repr(float(xi))]
                    row += [repr(float(np.real(x))) for x in self.states[j, k]]
                    if j < self.horizon:
                        row += [repr(float(np.real(x))) for x in self.inputs[j, k]]
                        row += [repr(float(np.real(x))) for x in self.outputs[j, k]]
                    else:
                        row += [""] * (D.p + D.m)
                    w.writerow(row)


def _check_grid(a: DiscreteProfile, b: DiscreteProfile):
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")


def step(D: DiscreteSystem, z: DiscreteProfile, u: DiscreteProfile):
    """One window: ``(A z + B u, C z + D u)`` evaluated node by node."""
    _check_grid(z, u)
    if z.dim != D.n or u.dim != D.p:
        raise ValueError("profile dimensions do not match the system")
    zn = z.values @ D.A_d.T + u.values @ D.B_d.T
    y = z.values @ D.C_d.T + u.values @ D.D_d.T
    return (DiscreteProfile(z.grid, zn, "state", z.index + 1),
            DiscreteProfile(z.grid, y, "output", z.index))


def _guard(Z, j):
    nrm = np.abs(Z).max() if Z.size else 0.0
    if not np.isfinite(nrm) or nrm > BLOWUP_NORM:
        raise InstabilityError(f"state window {j} exceeded {BLOWUP_NORM:.0e}")


def _run(D, zd0, J, input_of, transform):
    if J < 1:
        raise ValueError("horizon must be at least 1")
    if zd0.dim != D.n:
        raise ValueError(f"initial window has dimension {zd0.dim}, system has n={D.n}")
    grid = zd0.grid
    dtype = np.result_type(zd0.values, D.A_d, D.B_d, D.C_d, D.D_d)
    states = np.empty((J + 1, grid.size, D.n), dtype=dtype)
    inputs = np.empty((J, grid.size, D.p), dtype=dtype)
    outputs = np.empty((J, grid.size, D.m), dtype=dtype)
    z = DiscreteProfile(grid, zd0.values, "state", 0)
    states[0] = z.values
    for j in range(J):
        u = input_of(j, z)
        _check_grid(z, u)
        z_next, y = step(D, z, u)
        inputs[j] = u.values
        outputs[j] = y.values
        states[j + 1] = z_next.values
        _guard(z_next.values, j + 1)
        z = z_next
    for a in (states, inputs, outputs):
        a.setflags(write=False)
    return Trajectory(D, grid, states, inputs, outputs, transform)


def simulate_closed_loop(D: DiscreteSystem, F_d, zd0: DiscreteProfile, J: int,
                         transform=None) -> Trajectory:
    """Iterate with the state feedback ``u_d(j) = F_d z_d(j)``."""
    F_d = np.asarray(F_d)
    if F_d.shape != (D.p, D.n):
        raise ValueError(f"F_d has shape {F_d.shape}, expected {(D.p, D.n)}")

    def feedback(j, z):
        return DiscreteProfile(z.grid, z.values @ F_d.T, "input", j)

    return _run(D, zd0, J, feedback, transform)


def simulate_open_loop(D: DiscreteSystem, zd0: DiscreteProfile, inputs,
                       transform=None) -> Trajectory:
    """Iterate with prescribed input windows (a list of profiles or an array)."""
    if isinstance(inputs, np.ndarray):
        seq = [DiscreteProfile(zd0.grid, u, "input", j) for j, u in enumerate(inputs)]
    else:
        seq = list(inputs)

    def given(j, z):
        return seq[j]

    return _run(D, zd0, len(seq), given, transform)


def cost_discrete(traj: Trajectory) -> float:
    """``sum_j |y_d(j)|^2 + |u_d(j)|^2`` in ``L2(0, 1)``.

    The continuous-time cost over the same horizon is ``period`` times this.
    """
    g = traj.grid
    total = 0.0
    for j in range(traj.horizon):
        total += l2_norm_sq(g, traj.outputs[j]) + l2_norm_sq(g, traj.inputs[j])
    return total


def default_horizon(radius: float, n: int = 1, tail: float = 1e-10) -> int:
    """Steps needed for ``radius**(2 J)`` to fall below ``tail``."""
    if radius >= 1.0:
        raise ValueError("closed loop is not stable")
    if radius <= 0.0:
        return max(n, 1)
    J = math.ceil(math.log(tail) / (2.0 * math.log(radius)))
    return int(min(max(J, n, 1), MAX_HORIZON))


def decay_rate(traj: Trajectory, start: int | None = None) -> float:
    """Geometric decay factor of the state norms fitted over late windows.

    A least-squares line through ``log |z_d(j)|`` for ``j >= start``
    (default: the last two thirds of the horizon).  Returns 0 when the
    state vanishes identically.
    """
    norms = traj.state_norms()
    J = traj.horizon
    start = J // 3 if start is None else start
    js = np.arange(start, J + 1)
    vals = norms[start:]
    keep = vals > 0
    if keep.sum() < 2:
        return 0.0
    slope = np.polyfit(js[keep], np.log(vals[keep]), 1)[0]
    return float(math.exp(slope))


def _state_at(traj: Trajectory, clock: ClockTables, sys: HyperbolicSystem, zeta, t):
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    if t < 0 or t > traj.horizon * traj.period:
        raise ValueError(
            f"t={t} outside the simulated horizon [0, {traj.horizon * traj.period}]"
        )
    tau = t / traj.period
    s = np.atleast_1d(clock.k(zeta)) + tau
    # the slice at time t covers s in [tau, tau + 1]; reading it from window
    # floor(tau) wherever possible makes t = j * period return z_d(j) exactly
    j0 = min(math.floor(tau), traj.horizon)
    off = s - j0
    late = off > 1.0
    j = j0 + late.astype(int)
    xi = np.where(late, off - 1.0, off)
    out = np.empty((zeta.size, traj.states.shape[2]), dtype=traj.states.dtype)
    for jj in np.unique(j):
        sel = j == jj
        out[sel] = interpolate(traj.grid, traj.states[jj], xi[sel])
    lam = interpolate(sys.grid, sys.lambda0.values, zeta)
    return out / lam[:, None]


def reconstruct_profile(traj: Trajectory, t: float, clock: ClockTables,
                        sys: HyperbolicSystem) -> StateProfile:
    """Continuous-time state ``z(., t)`` of the transport system.

    Uses ``z(zeta, t) = f(k(zeta) + t / p(1)) / lambda0(zeta)`` with ``f``
    read off the stored windows, linearly interpolated in the window
    coordinate.
    """
    vals = _state_at(traj, clock, sys, clock.grid.nodes, t)
    return StateProfile(clock.grid, vals)


def to_original_variables(profile: StateProfile, transform) -> StateProfile:
    """Undo the coupling-removing change of variables: ``z_orig = P z``."""
    if profile.grid != transform.grid:
        raise GridMismatchError("profile and transform grids differ")
    return StateProfile(profile.grid, np.einsum("kij,kj->ki", transform.P, profile.values))


def boundary_control_signal(traj: Trajectory, F_d, clock: ClockTables,
                            sys: HyperbolicSystem, t: float) -> np.ndarray:
    """Optimal boundary input ``u(t) = lambda0(1) F_d z(1, t)``."""
    z1 = _state_at(traj, clock, sys, [1.0], t)[0]
    return float(sys.lambda0.values[-1]) * (np.asarray(F_d) @ z1)


def reconstruction_to_csv(path, times, profiles) -> None:
    """Columns ``t, zeta, z_1..z_n`` for a list of reconstructed profiles."""
    profiles = list(profiles)
    n = profiles[0].dim if profiles else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "zeta"] + [f"z_{i + 1}" for i in range(n)])
        for t, prof in zip(times, profiles):
            for zeta, row in zip(prof.grid.nodes, prof.values):
                w.writerow([repr(float(t)), repr(float(zeta))]
                           + [repr(float(np.real(x))) for x in row])

