"""Command-line interface.

Exit codes: 0 success, 1 numerical failure, 2 invalid input, 3 solver did
not converge (partial output is still written).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    minkowski_dimension_estimate,
    scaling_profile,
    uniform_measure_estimate,
    volume_estimate,
)
from .diversity import DEFAULT_ORDERS, crossing_order, diversity, diversity_profile
from .errors import MaxDivError, NotConverged, ValidationError
from .exact import DEFAULT_CAP, max_diversity_exact, verify_maximiser
from .io import (
    dumps,
    measure_dict,
    read_measure,
    read_space_source,
    result_to_dict,
    write_profile_csv,
    write_scaling_csv,
    write_trace_csv,
    write_weighting_csv,
)
from .magnitude import weight_vector
from .numeric import SolverOptions, maximise

EXIT_NUMERIC, EXIT_INVALID, EXIT_NOT_CONVERGED = 1, 2, 3


def _parse_grid(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(args, obj):
    with _output(args.out) as fh:
        fh.write(dumps(obj) + "\n")


def _space(args):
    return read_space_source(args.space, kind=args.kind, metric=args.metric,
                             scale=args.scale).build()


def _opts(args) -> SolverOptions:
    return SolverOptions(tolerance=args.tol if args.tol is not None else 1e-10,
                         seed=args.seed, max_iters=args.max_iters)


def _t_grid(args) -> list[float]:
    if args.t_grid:
        ts = args.t_grid
    else:
        ts = np.geomspace(args.t_min, args.t_max, args.samples).tolist()
    if any(not math.isfinite(t) or t <= 0 for t in ts) or sorted(ts) != list(ts):
        raise ValidationError("t grid must be finite, positive and increasing")
    return ts


def cmd_profile(args):
    space = _space(args)
    mu = read_measure(args.measure, space, args.normalize)
    prof = diversity_profile(space, mu, args.orders)
    with _output(args.out) as fh:
        write_profile_csv(fh, prof)


def cmd_magnitude(args):
    w = weight_vector(_space(args))
    _emit_json(args, {"magnitude": w.magnitude, "unique": w.unique,
                      "residual": w.residual, "condition": w.condition,
                      "positive": w.positive})


def cmd_weighting(args):
    space = _space(args)
    w = weight_vector(space)
    with _output(args.out) as fh:
        write_weighting_csv(fh, space, w.weights)


def _maxdiv_result(args, space):
    solver = args.solver
    if solver == "auto":
        solver = "exact" if space.n <= args.cap else "convex"
    if solver == "exact":
        return max_diversity_exact(space, cap=args.cap)
    if solver == "convex":
        return maximise(space, _opts(args))
    raise ValidationError(f"unknown solver {solver!r}")


def cmd_maxdiv(args):
    space = _space(args)
    try:
        res = _maxdiv_result(args, space)
    except NotConverged as exc:
        if exc.partial is not None:
            out = result_to_dict(exc.partial, space)
            out["converged"] = False
            _emit_json(args, out)
        raise
    _emit_json(args, result_to_dict(res, space))
    if args.trace and "gap_trace" in res.diagnostics:
        with open(args.trace, "w", newline="") as fh:
            write_trace_csv(fh, res.diagnostics["gap_trace"])


def cmd_verify(args):
    space = _space(args)
    mu = read_measure(args.measure, space, args.normalize)
    value = args.value if args.value is not None else diversity(space, mu, 2.0)
    cert = verify_maximiser(space, mu, value, args.tol if args.tol is not None else 1e-8)
    _emit_json(args, {"value": value, **cert.as_dict()})


def cmd_crossing(args):
    space = _space(args)
    mu1 = read_measure(args.measure, space, args.normalize)
    mu2 = read_measure(args.measure2, space, args.normalize)
    q = crossing_order(space, mu1, mu2, tuple(args.bracket),
                       tol=args.tol if args.tol is not None else 1e-10)
    _emit_json(args, {"crossing_order": q, "bracket": list(args.bracket)})


def cmd_scaling(args):
    prof = scaling_profile(_space(args), _t_grid(args), args.solver, _opts(args))
    with _output(args.out) as fh:
        write_scaling_csv(fh, prof)


def _points(args):
    src = read_space_source(args.space, kind=args.kind or "points", metric=args.metric)
    if src.kind == "kernel":
        raise ValidationError("this command needs points or distances, not a kernel")
    metric = "precomputed" if src.kind == "distances" else src.metric
    return src.data, metric


def cmd_dimension(args):
    pts, metric = _points(args)
    est = minkowski_dimension_estimate(pts, metric, (args.t_min, args.t_max), args.samples,
                                       args.solver, _opts(args))
    _emit_json(args, {
        "slope": est.slope,
        "window": list(est.window),
        "diagnostics": {"r_squared": est.r_squared, "residual_band": est.residual_band,
                        "local_slope": est.local_slope, "intercept": est.intercept,
                        "t": est.t_values, "dmax": est.dmax_values},
    })


def cmd_volume(args):
    pts, metric = _points(args)
    est = volume_estimate(pts, args.dim, (args.t_min, args.t_max), args.samples,
                          args.solver, metric, _opts(args))
    _emit_json(args, {"estimate": est.estimate, "constant": est.constant,
                      "window": [args.t_min, args.t_max],
                      "diagnostics": {"t": est.t_values, "dmax": est.dmax_values,
                                      "sequence": est.sequence}})


def cmd_uniform(args):
    space = _space(args)
    est = uniform_measure_estimate(space, _t_grid(args), args.solver,
                                   args.tv_threshold, _opts(args))
    _emit_json(args, {"measure": measure_dict(space, est.measure), "t_used": est.t_used,
                      "converged": est.converged,
                      "convergence_diag": est.convergence_diag})


def _add_common(p, measure=False):
    p.add_argument("--space", required=True,
                   help="JSON space descriptor, or a CSV file (see --kind)")
    p.add_argument("--kind", choices=("kernel", "points", "distances"), default=None,
                   help="how to read a bare CSV --space (default: kernel)")
    p.add_argument("--metric", choices=("euclidean", "l1"), default="euclidean")
    p.add_argument("--scale", type=float, default=1.0, help="scale factor t for points/distances")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--solver", choices=("auto", "exact", "convex"), default="auto")
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--config", default=None,
                   help="JSON file whose keys override the command-line flags")
    if measure:
        p.add_argument("--measure", default="uniform", help="'uniform' or CSV of label,weight")
        p.add_argument("--normalize", action="store_true",
                       help="rescale the measure to total mass 1")


def _add_window(p, t_min, t_max, samples):
    p.add_argument("--t-min", type=float, default=t_min)
    p.add_argument("--t-max", type=float, default=t_max)
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--t-grid", type=_parse_grid, default=None,
                   help="explicit comma-separated t values (overrides the window)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxdiv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="diversity profile of a measure (CSV)")
    _add_common(p, measure=True)
    p.add_argument("--orders", type=_parse_grid, default=list(DEFAULT_ORDERS))
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("magnitude", help="magnitude of the space (JSON)")
    _add_common(p)
    p.set_defaults(func=cmd_magnitude)

    p = sub.add_parser("weighting", help="weighting of the space (CSV)")
    _add_common(p)
    p.set_defaults(func=cmd_weighting)

    p = sub.add_parser("maxdiv", help="maximum diversity and a maximising measure (JSON)")
    _add_common(p)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--trace", default=None, help="write the convex solver's gap trace (CSV)")
    p.set_defaults(func=cmd_maxdiv)

    p = sub.add_parser("verify", help="certify a measure as maximising (JSON)")
    _add_common(p, measure=True)
    p.add_argument("--value", type=float, default=None,
                   help="claimed maximum diversity (default: the measure's order-2 diversity)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("crossing", help="order where two diversity profiles cross (JSON)")
    _add_common(p, measure=True)
    p.add_argument("--measure2", required=True)
    p.add_argument("--bracket", type=_parse_grid, default=[0.0, 1.0])
    p.set_defaults(func=cmd_crossing)

    p = sub.add_parser("scaling", help="t -> D_max(tX) profile (CSV)")
    _add_common(p)
    _add_window(p, 1.0, 100.0, 10)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("dimension", help="dimension estimate from D_max growth (JSON)")
    _add_common(p)
    _add_window(p, 10.0, 100.0, 6)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("volume", help="volume estimate from D_max growth (JSON)")
    _add_common(p)
    _add_window(p, 10.0, 100.0, 4)
    p.add_argument("--dim", type=int, required=True, help="ambient dimension n")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("uniform", help="uniform measure estimate (JSON)")
    _add_common(p)
    _add_window(p, 5.0, 80.0, 5)
    p.add_argument("--tv-threshold", type=float, default=1e-3)
    p.set_defaults(func=cmd_uniform)
    return parser


def _apply_config(parser, args):
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("func", "command") or not hasattr(args, dest):
            raise ValidationError(f"config key {key!r} is not an option of {args.command}")
        if dest in ("orders", "t_grid", "bracket") and isinstance(val, str):
            val = _parse_grid(val)
        setattr(args, dest, val)
    if not Path(args.space).exists():
        raise ValidationError(f"space file {args.space} does not exist")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            _apply_config(parser, args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except NotConverged as exc:
        print(f"maxdiv: not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except ValidationError as exc:
        print(f"maxdiv: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (MaxDivError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"maxdiv: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
