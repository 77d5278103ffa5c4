"""Command-line front end: ``wavelq validate|solve|simulate|examples``.

Exit codes: 0 success, 1 not well-posed, 2 input error, 3 not optimizable,
4 runtime instability.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .control import optimal_cost, sorted_eigenvalues, synthesize
from .discretize import DiscreteProfile, DiscreteSystem, discretize_system, lift_initial_condition
from .errors import InstabilityError, NotOptimizableError, SchemaError, WellPosednessError
from .examples import HeatExchangerParams, StringsParams, build_heat_exchanger, build_strings
from .model import SpatialGrid, StateProfile, load_system, save_system, validate_system
from .riccati import DEFAULT_RICCATI_TOL
from .sim import (
    cost_discrete,
    decay_rate,
    default_horizon,
    reconstruct_profile,
    reconstruction_to_csv,
    simulate_closed_loop,
)
from .transform import to_transport_variables

EXIT_OK = 0
EXIT_ILL_POSED = 1
EXIT_INPUT = 2
EXIT_NOT_OPTIMIZABLE = 3
EXIT_UNSTABLE = 4


class InputError(Exception):
    pass


def _g(x) -> str:
    return f"{x:.6g}"


def _cplx(z) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-12 * max(1.0, abs(z)):
        return _g(z.real)
    return f"{z.real:.6g}{z.imag:+.6g}i"


def _matrix_rows(a) -> list[str]:
    return ["  [" + "  ".join(f"{x: .6g}" for x in row) + "]" for row in np.real(np.atleast_2d(a)) + 0.0]


@contextlib.contextmanager
def _thread_cap():
    raw = os.environ.get("WAVELQ_THREADS")
    if not raw:
        yield
        return
    try:
        limit = int(raw)
    except ValueError:
        raise InputError(f"WAVELQ_THREADS must be an integer, got {raw!r}") from None
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=max(limit, 1)):
        yield


# ---------------------------------------------------------------------------
# loading


def _read_document(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: system document must be a JSON object")
    return doc


def _is_discrete(doc) -> bool:
    return "A_d" in doc


def _load(args):
    """Return ``(system or None, Discretization or None, DiscreteSystem)``."""
    if args.grid < 2:
        raise InputError("--grid must be at least 2")
    doc = _read_document(args.system)
    if _is_discrete(doc):
        try:
            return None, None, DiscreteSystem.from_dict(doc)
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"bad discrete system: {exc}") from None
    try:
        plant = load_system(doc, grid_cells=args.grid)
    except SchemaError:
        raise
    except ValueError as exc:
        raise WellPosednessError(str(exc)) from None
    report = validate_system(plant)
    if not report.well_posed:
        raise WellPosednessError("system is not well-posed\n" + str(report))
    disc = discretize_system(plant)
    return plant, disc, disc.discrete


def _parse_vector(text):
    try:
        vals = json.loads(text) if text.strip().startswith("[") else [float(x) for x in text.split(",")]
        return np.atleast_1d(np.asarray(vals, dtype=float))
    except (ValueError, json.JSONDecodeError):
        raise InputError(f"cannot parse vector {text!r}") from None


def _parse_ic(spec, grid: SpatialGrid, n: int) -> np.ndarray:
    """``constant:<v1,...,vn>`` or ``samples:<JSON array | path>`` to nodal samples."""
    if spec is None:
        return np.ones((grid.size, n))
    kind, _, body = spec.partition(":")
    if kind == "constant":
        vec = _parse_vector(body)
        if vec.size == 1:
            vec = np.full(n, vec[0])
        if vec.size != n:
            raise InputError(f"--ic constant needs {n} components, got {vec.size}")
        return np.broadcast_to(vec, (grid.size, n)).copy()
    if kind == "samples":
        src = body
        if not body.strip().startswith("[") and Path(body).exists():
            src = Path(body).read_text()
        try:
            arr = np.asarray(json.loads(src), dtype=float)
        except (ValueError, json.JSONDecodeError):
            raise InputError("--ic samples must be a JSON array or a file holding one") from None
        if arr.ndim == 1 and n == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[1] != n:
            raise InputError(f"--ic samples need shape (nodes, {n}), got {arr.shape}")
        if arr.shape[0] == grid.size:
            return arr
        # resample from the sample count's own uniform grid
        src_grid = SpatialGrid(arr.shape[0] - 1)
        from .model import interpolate

        return interpolate(src_grid, arr, grid.nodes)
    raise InputError(f"unknown --ic kind {kind!r}; use constant:<vector> or samples:<data>")


def _initial_window(args, plant, disc, D) -> DiscreteProfile:
    grid = disc.clock.grid if disc is not None else SpatialGrid(args.grid)
    vals = _parse_ic(args.ic, grid, D.n)
    if not args.ic_original:
        return DiscreteProfile(grid, vals, "state", 0)
    if disc is None:
        raise InputError("--ic-original needs a PDE system file, not discrete matrices")
    z0 = to_transport_variables(StateProfile(grid, vals), disc.transform)
    return lift_initial_condition(z0, disc.transport, disc.clock)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    doc = _read_document(args.system)
    if _is_discrete(doc):
        D = DiscreteSystem.from_dict(doc)
        print(f"discrete system  n={D.n} p={D.p} m={D.m} period={_g(D.period)}")
        return EXIT_OK
    try:
        plant = load_system(doc, grid_cells=args.grid)
    except SchemaError:
        raise
    except ValueError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_ILL_POSED
    report = validate_system(plant)
    print(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "validation.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK if report.well_posed else EXIT_ILL_POSED


def _print_summary(lq, disc):
    D = lq.system
    print(f"system            n={D.n} p={D.p} m={D.m} period={_g(D.period)}")
    if disc is not None:
        print(f"transform defect  {_g(disc.transform.inverse_residual)}")
    print(f"open-loop radius  {_g(lq.open_loop_radius)}")
    print(f"closed-loop radius {_g(lq.closed_loop_radius)}")
    print(f"CARE              residual {_g(lq.care.residual)}, {lq.care.iterations} iterations, "
          f"{'converged' if lq.care.converged else 'NOT converged'}")
    print(f"FARE              residual {_g(lq.fare.residual)}, {lq.fare.iterations} iterations, "
          f"{'converged' if lq.fare.converged else 'NOT converged'}")
    print(f"unique            {'yes' if lq.unique else 'not established'}")
    print("closed-loop eigenvalues  " + ", ".join(_cplx(z) for z in sorted_eigenvalues(lq.A_cl)))
    print("F_d =")
    print("\n".join(_matrix_rows(lq.F_d)))


def cmd_solve(args) -> int:
    plant, disc, D = _load(args)
    lq = synthesize(D, tol=args.riccati_tol)
    _print_summary(lq, disc)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        lq.to_json(out / "solution.json", indent=2, sort_keys=True)
        D.to_json(out / "discrete.json", indent=2, sort_keys=True)
        if disc is not None:
            disc.transform.to_csv(out / "transform.csv")
    return EXIT_OK


def _default_times(period, horizon):
    ts = [0.0, 0.5 * period, float(period), 2.0 * period]
    return [t for t in ts if t <= horizon * period]


def cmd_simulate(args) -> int:
    plant, disc, D = _load(args)
    lq = synthesize(D, tol=args.riccati_tol)
    if not lq.stabilizing:
        print(f"closed loop not stable (radius {_g(lq.closed_loop_radius)})", file=sys.stderr)
        return EXIT_UNSTABLE
    if args.horizon == "auto":
        J = default_horizon(lq.closed_loop_radius, D.n)
    else:
        try:
            J = int(args.horizon)
        except ValueError:
            raise InputError(f"--horizon must be an integer or 'auto', got {args.horizon!r}") from None
        if J < 1:
            raise InputError("--horizon must be positive")
    zd0 = _initial_window(args, plant, disc, D)
    traj = simulate_closed_loop(D, lq.F_d, zd0, J, disc.transform if disc else None)

    achieved = cost_discrete(traj)
    predicted = optimal_cost(lq.Pi, zd0)
    gap = abs(achieved - predicted)
    rel = gap / abs(predicted) if predicted != 0 else (0.0 if gap == 0 else math.inf)
    rate = decay_rate(traj)
    report = {
        "horizon": J,
        "period": D.period,
        "cost_discrete": achieved,
        "optimal_cost": predicted,
        "absolute_gap": gap,
        "relative_gap": rel,
        "cost_continuous": D.period * achieved,
        "decay_rate": rate,
        "closed_loop_radius": lq.closed_loop_radius,
    }
    print(f"horizon           {J} steps ({_g(J * D.period)} time units)")
    print(f"cost (simulated)  {_g(achieved)}")
    print(f"cost <z, Pi z>    {_g(predicted)}")
    print(f"gap               {_g(gap)} absolute, {_g(rel)} relative")
    print(f"decay rate        {_g(rate)} (closed-loop radius {_g(lq.closed_loop_radius)})")

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        traj.to_csv(out / "trajectory.csv")
        (out / "cost.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        if disc is not None:
            times = args.times if args.times is not None else _default_times(D.period, J)
            profiles = [reconstruct_profile(traj, t, disc.clock, disc.transport) for t in times]
            reconstruction_to_csv(out / "reconstruction.csv", times, profiles)
    return EXIT_OK


def cmd_examples(args) -> int:
    if args.name == "strings":
        plant = build_strings(StringsParams(args.rho, args.T), args.grid)
    else:
        plant = build_heat_exchanger(HeatExchangerParams(args.alpha1, args.alpha2, args.v), args.grid)
    path = Path(args.out or ".") / f"{args.name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_system(plant, path)
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 already; route through our handler for a uniform message
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--grid", type=int, default=256, help="spatial cells (default 256)")
    common.add_argument("--out", default=None, help="output directory")

    pipeline = _Parser(add_help=False, parents=[common])
    pipeline.add_argument("--system", required=True, help="JSON system file")
    pipeline.add_argument("--riccati-tol", type=float, default=DEFAULT_RICCATI_TOL)

    parser = _Parser(prog="wavelq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("validate", parents=[pipeline], help="check well-posedness")
    sub.add_parser("solve", parents=[pipeline], help="Riccati solutions and optimal feedback")
    sim = sub.add_parser("simulate", parents=[pipeline], help="closed-loop simulation and cost report")
    sim.add_argument("--horizon", default="auto", help="steps, or 'auto' (default)")
    sim.add_argument("--ic", default=None,
                     help="initial window: constant:<v1,...> or samples:<JSON array|path> (default ones)")
    sim.add_argument("--ic-original", action="store_true",
                     help="read --ic as the PDE initial state z(., 0) instead of z_d(0)")
    sim.add_argument("--times", type=float, nargs="+", default=None,
                     help="reconstruction times for reconstruction.csv")

    ex = sub.add_parser("examples", parents=[common], help="write a benchmark system file")
    ex.add_argument("name", help="strings | heat-exchanger")
    ex.add_argument("--rho", type=float, default=1.0)
    ex.add_argument("--T", type=float, default=1.0)
    ex.add_argument("--alpha1", type=float, default=1.0)
    ex.add_argument("--alpha2", type=float, default=1.0)
    ex.add_argument("--v", type=float, default=1.0)
    return parser


_COMMANDS = {"validate": cmd_validate, "solve": cmd_solve, "simulate": cmd_simulate,
             "examples": cmd_examples}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "examples" and args.name not in ("strings", "heat-exchanger"):
            raise InputError(f"unknown example {args.name!r}; choose strings or heat-exchanger")
        if getattr(args, "riccati_tol", 1.0) <= 0:
            raise InputError("--riccati-tol must be positive")
        with _thread_cap():
            return _COMMANDS[args.command](args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except WellPosednessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ILL_POSED
    except NotOptimizableError as exc:
        print(f"not optimizable: {exc}", file=sys.stderr)
        return EXIT_NOT_OPTIMIZABLE
    except InstabilityError as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
