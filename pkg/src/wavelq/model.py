"""Continuous-time plant description and sampled spatial fields.

The plant is a boundary controlled, boundary observed transport system on
the unit interval,

    dz/dt = -d/dzeta (lambda0 z) + M z,
    [0; I] u = -lambda0(0) K z(0) - lambda0(1) L z(1),
    y        = -lambda0(0) Ky z(0) - lambda0(1) Ly z(1),

with a single positive wave speed ``lambda0`` and an in-domain coupling
matrix ``M``.  Spatial coefficients are stored as samples on a uniform grid
and evaluated between nodes by linear interpolation.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import SchemaError

__all__ = [
    "SpatialGrid",
    "ScalarField",
    "MatrixField",
    "HyperbolicSystem",
    "StateProfile",
    "ValidationReport",
    "validate_system",
    "sample_at",
    "interpolate",
    "load_system",
    "system_to_dict",
    "save_system",
]

K_RCOND = 1e-12


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid ``0 = zeta_0 < ... < zeta_N = 1`` with ``N`` cells."""

    num_cells: int

    def __post_init__(self):
        if int(self.num_cells) != self.num_cells or self.num_cells < 1:
            raise ValueError(f"num_cells must be a positive integer, got {self.num_cells!r}")
        object.__setattr__(self, "num_cells", int(self.num_cells))

    @cached_property
    def nodes(self) -> np.ndarray:
        return _frozen(np.arange(self.num_cells + 1) / self.num_cells)

    @property
    def step(self) -> float:
        return 1.0 / self.num_cells

    @property
    def size(self) -> int:
        return self.num_cells + 1


def interpolate(grid: SpatialGrid, values: np.ndarray, x):
    """Piecewise-linear interpolation of nodal ``values`` at points ``x``.

    ``values`` has the node axis first; trailing axes are carried along.
    Queries that hit a node return the stored sample bit for bit.
    """
    values = np.asarray(values)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or np.any(xa > 1.0) or np.any(np.isnan(xa)):
        raise ValueError("interpolation abscissa must lie in [0, 1]")
    nodes = grid.nodes
    idx = np.clip(np.searchsorted(nodes, xa, side="right") - 1, 0, grid.num_cells - 1)
    theta = (xa - nodes[idx]) * grid.num_cells
    # exact at the right end of the last cell
    at_end = xa == 1.0
    idx = np.where(at_end, grid.num_cells, idx)
    theta = np.where(at_end, 0.0, theta)
    nxt = np.minimum(idx + 1, grid.num_cells)
    shape = theta.shape + (1,) * (values.ndim - 1)
    th = theta.reshape(shape)
    out = (1.0 - th) * values[idx] + th * values[nxt]
    return out


def sample_at(field_, zeta):
    """Evaluate a :class:`ScalarField` or :class:`MatrixField` at ``zeta``."""
    zeta = float(zeta)
    if not 0.0 <= zeta <= 1.0:
        raise ValueError(f"zeta={zeta} outside [0, 1]")
    out = interpolate(field_.grid, field_.values, zeta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real scalar samples on a grid (the wave speed ``lambda0``)."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("scalar field samples must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.size, float(value)))

    @classmethod
    def from_callable(cls, grid, func: Callable[[float], float]):
        return cls(grid, np.array([func(z) for z in grid.nodes], dtype=float))

    @property
    def margin(self) -> float:
        """Smallest sample; positive for an admissible wave speed."""
        return float(self.values.min())

    def __call__(self, zeta):
        return sample_at(self, zeta)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))


@dataclass(frozen=True, eq=False)
class MatrixField:
    """An ``n x n`` matrix sample per grid node (the coupling ``M``)."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if v.ndim != 3 or v.shape[0] != self.grid.size or v.shape[1] != v.shape[2]:
            raise ValueError(
                f"matrix field needs shape ({self.grid.size}, n, n), got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("matrix field samples must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def constant(cls, grid, matrix):
        m = np.atleast_2d(np.asarray(matrix))
        return cls(grid, np.broadcast_to(m, (grid.size,) + m.shape))

    @classmethod
    def zeros(cls, grid, n):
        return cls(grid, np.zeros((grid.size, n, n)))

    @classmethod
    def from_callable(cls, grid, func):
        return cls(grid, np.array([np.atleast_2d(func(z)) for z in grid.nodes]))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def __call__(self, zeta):
        return sample_at(self, zeta)


def _as_matrix(a, name):
    m = np.asarray(a)
    if m.dtype.kind not in "fc":
        m = m.astype(float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return _frozen(m)


@dataclass(frozen=True, eq=False)
class HyperbolicSystem:
    """Boundary controlled transport system in uniform-speed form.

    Parameters
    ----------
    lambda0 : ScalarField
        Wave speed.
    coupling : MatrixField
        In-domain coupling ``M``; all zeros for pure transport.
    K, L : (n, n) array_like
        Boundary matrices acting on the traces at 0 and 1.
    Ky, Ly : (m, n) array_like
        Output matrices.
    p : int
        Number of inputs; they enter through the last ``p`` rows.
    meta : dict, optional
        Free-form annotations carried through JSON round trips.
    state_map : TransformData, optional
        Set on systems produced by :func:`wavelq.transform.to_transport_form`;
        relates their state to the original one by ``z = Q z_orig``.
    """

    lambda0: ScalarField
    coupling: MatrixField
    K: np.ndarray
    L: np.ndarray
    Ky: np.ndarray
    Ly: np.ndarray
    p: int
    meta: dict = field(default_factory=dict, compare=False)
    state_map: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("K", "L", "Ky", "Ly"):
            object.__setattr__(self, name, _as_matrix(getattr(self, name), name))
        n = self.K.shape[0]
        problems = self.dimension_problems()
        if problems:
            raise ValueError("inconsistent system dimensions: " + "; ".join(problems))
        if self.coupling.grid != self.lambda0.grid:
            raise ValueError("lambda0 and coupling must share a grid")
        object.__setattr__(self, "p", int(self.p))
        assert self.input_selector.shape == (n, self.p)

    def dimension_problems(self):
        n = self.K.shape[0]
        out = []
        if self.K.shape != (n, n):
            out.append(f"K is {self.K.shape}, expected square")
        if self.L.shape != (n, n):
            out.append(f"L is {self.L.shape}, expected {(n, n)}")
        if self.Ky.ndim != 2 or self.Ky.shape[1] != n or self.Ky.shape[0] < 1:
            out.append(f"Ky is {self.Ky.shape}, expected (m, {n}) with m >= 1")
        if self.Ly.shape != self.Ky.shape:
            out.append(f"Ly is {self.Ly.shape}, expected {self.Ky.shape}")
        if not 1 <= int(self.p) <= n:
            out.append(f"p={self.p} outside [1, {n}]")
        if self.coupling.dim != n:
            out.append(f"coupling is {self.coupling.dim}x{self.coupling.dim}, expected {n}x{n}")
        return out

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @property
    def m(self) -> int:
        return self.Ky.shape[0]

    @property
    def grid(self) -> SpatialGrid:
        return self.lambda0.grid

    @cached_property
    def input_selector(self) -> np.ndarray:
        """The ``n x p`` block ``[0; I]``."""
        g = np.zeros((self.n, self.p))
        g[self.n - self.p:, :] = np.eye(self.p)
        return _frozen(g)

    @property
    def dtype(self):
        return np.result_type(self.K, self.L, self.Ky, self.Ly, self.coupling.values)


@dataclass(frozen=True, eq=False)
class StateProfile:
    """An ``n``-vector sampled at every grid node."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.size:
            raise ValueError(f"profile needs {self.grid.size} node samples, got {v.shape[0]}")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def constant(cls, grid, vector):
        vec = np.atleast_1d(np.asarray(vector))
        return cls(grid, np.broadcast_to(vec, (grid.size, vec.size)))

    @classmethod
    def from_callable(cls, grid, func):
        return cls(grid, np.array([np.atleast_1d(func(z)) for z in grid.nodes]))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __call__(self, zeta):
        return interpolate(self.grid, self.values, zeta)


@dataclass(frozen=True)
class ValidationReport:
    """Structural findings about a :class:`HyperbolicSystem`."""

    n: int
    p: int
    m: int
    dimensions_consistent: bool
    dimension_problems: tuple
    lambda0_margin: float
    lambda0_positive: bool
    k_singular_ratio: float
    k_condition: float
    k_invertible: bool
    rcond: float

    @property
    def well_posed(self) -> bool:
        return self.dimensions_consistent and self.k_invertible and self.lambda0_positive

    def to_dict(self):
        return {
            "n": self.n,
            "p": self.p,
            "m": self.m,
            "dimensions_consistent": self.dimensions_consistent,
            "dimension_problems": list(self.dimension_problems),
            "lambda0_margin": self.lambda0_margin,
            "lambda0_positive": self.lambda0_positive,
            "k_singular_ratio": self.k_singular_ratio,
            "k_condition": self.k_condition,
            "k_invertible": self.k_invertible,
            "rcond": self.rcond,
            "well_posed": self.well_posed,
        }

    def __str__(self):
        lines = [
            f"dimensions      n={self.n} p={self.p} m={self.m} "
            f"({'consistent' if self.dimensions_consistent else 'INCONSISTENT'})",
            f"lambda0 margin  {self.lambda0_margin:.6g} "
            f"({'positive' if self.lambda0_positive else 'NOT positive'})",
            f"K smin/smax     {self.k_singular_ratio:.6g} (cond {self.k_condition:.6g}, "
            f"{'invertible' if self.k_invertible else 'SINGULAR'})",
            f"well-posed      {'yes' if self.well_posed else 'no'}",
        ]
        return "\n".join(lines)


def validate_system(sys: HyperbolicSystem, rcond: float = K_RCOND) -> ValidationReport:
    """Check dimensions, wave-speed positivity and invertibility of ``K``.

    Never raises on a bad system; every finding goes into the report.
    """
    problems = tuple(sys.dimension_problems())
    sv = np.linalg.svd(sys.K, compute_uv=False) if sys.K.size else np.array([0.0])
    smax = float(sv.max())
    smin = float(sv.min())
    ratio = smin / smax if smax > 0 else 0.0
    cond = smax / smin if smin > 0 else np.inf
    margin = sys.lambda0.margin
    return ValidationReport(
        n=sys.n,
        p=sys.p,
        m=sys.m,
        dimensions_consistent=not problems,
        dimension_problems=problems,
        lambda0_margin=margin,
        lambda0_positive=margin > 0,
        k_singular_ratio=ratio,
        k_condition=cond,
        k_invertible=ratio > rcond,
        rcond=rcond,
    )


# --------------------------------------------------------------------------
# JSON system files

_REQUIRED = ("n", "p", "m", "lambda0", "coupling", "K", "L", "Ky", "Ly", "grid_cells")


def _matrix_field(doc, name, shape):
    try:
        a = np.array(doc, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"field '{name}' is not a numeric array: {exc}", name) from None
    if a.shape != shape:
        raise SchemaError(f"field '{name}' has shape {a.shape}, expected {shape}", name)
    return a


def load_system(source, grid_cells: int | None = None) -> HyperbolicSystem:
    """Build a :class:`HyperbolicSystem` from a JSON document.

    ``source`` is a path, a JSON string or an already parsed mapping.
    ``grid_cells`` overrides the document's resolution; sampled fields are
    then re-interpolated onto the new grid.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = source
        if isinstance(source, (os.PathLike, str)) and os.path.exists(source):
            with open(source) as fh:
                text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("system document must be a JSON object")
    for key in _REQUIRED:
        if key not in doc:
            raise SchemaError(f"missing required field '{key}'", key)

    try:
        n, p, m = int(doc["n"]), int(doc["p"]), int(doc["m"])
        file_cells = int(doc["grid_cells"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"n, p, m and grid_cells must be integers: {exc}") from None
    if n < 1 or m < 1 or not 1 <= p <= n:
        raise SchemaError(f"need n >= 1, m >= 1 and 1 <= p <= n (got n={n}, p={p}, m={m})", "p")
    if file_cells < 1:
        raise SchemaError("grid_cells must be positive", "grid_cells")
    file_grid = SpatialGrid(file_cells)
    grid = SpatialGrid(grid_cells) if grid_cells is not None else file_grid

    lam = doc["lambda0"]
    if not isinstance(lam, dict) or not ({"constant", "samples"} & set(lam)):
        raise SchemaError("lambda0 needs a 'constant' or 'samples' entry", "lambda0")
    if "constant" in lam:
        lambda0 = ScalarField.constant(grid, float(lam["constant"]))
    else:
        s = np.asarray(lam["samples"], dtype=float)
        if s.shape != (file_grid.size,):
            raise SchemaError(
                f"lambda0 samples: expected {file_grid.size} values, got {s.shape}", "lambda0"
            )
        lambda0 = ScalarField(grid, interpolate(file_grid, s, grid.nodes))

    cpl = doc["coupling"]
    if not isinstance(cpl, dict) or not ({"constant_matrix", "samples"} & set(cpl)):
        raise SchemaError("coupling needs a 'constant_matrix' or 'samples' entry", "coupling")
    if "constant_matrix" in cpl:
        coupling = MatrixField.constant(grid, _matrix_field(cpl["constant_matrix"], "coupling", (n, n)))
    else:
        s = _matrix_field(cpl["samples"], "coupling", (file_grid.size, n, n))
        coupling = MatrixField(grid, interpolate(file_grid, s, grid.nodes))

    K = _matrix_field(doc["K"], "K", (n, n))
    L = _matrix_field(doc["L"], "L", (n, n))
    Ky = _matrix_field(doc["Ky"], "Ky", (m, n))
    Ly = _matrix_field(doc["Ly"], "Ly", (m, n))
    meta = {k: v for k, v in doc.items() if k not in _REQUIRED}
    return HyperbolicSystem(lambda0, coupling, K, L, Ky, Ly, p, meta=meta)


def system_to_dict(sys: HyperbolicSystem) -> dict:
    """Inverse of :func:`load_system` (real-valued systems only)."""
    if np.iscomplexobj(sys.K) or np.iscomplexobj(sys.coupling.values):
        raise ValueError("JSON system files carry real data only")
    doc = {"n": sys.n, "p": sys.p, "m": sys.m}
    if sys.lambda0.is_constant:
        doc["lambda0"] = {"constant": float(sys.lambda0.values[0])}
    else:
        doc["lambda0"] = {"samples": sys.lambda0.values.tolist()}
    if sys.coupling.is_constant:
        doc["coupling"] = {"constant_matrix": (sys.coupling.values[0] + 0.0).tolist()}
    else:
        doc["coupling"] = {"samples": sys.coupling.values.tolist()}
    for name in ("K", "L", "Ky", "Ly"):
        doc[name] = (getattr(sys, name) + 0.0).tolist()  # drop negative zeros
    doc["grid_cells"] = sys.grid.num_cells
    doc.update(sys.meta)
    return doc


def save_system(sys: HyperbolicSystem, path) -> None:
    with open(path, "w") as fh:
        json.dump(system_to_dict(sys), fh, indent=2)
        fh.write("\n")
