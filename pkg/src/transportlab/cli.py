"""Command-line frontend.

Subcommands: dist, dist1d, example1, theorem2, clt, check-cost.  Every run
prints (or writes with --out) a JSON report carrying schema_version "1" and
the fully resolved configuration, so identical invocations produce
byte-identical reports.  Exit codes: 0 success, 1 validation problem, 2
numerical failure (a divergence sentinel where a finite value was needed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, clt_lab, convergence
from .costs import check_doubling, check_reverse_split, \
    check_split_inequality, parse_cost_spec
from .errors import DivergenceError, ValidationError
from .measures import DiscreteMeasure, Distribution1D, load_measure
from .ot_exact import transport_cost_convex, wasserstein_p
from .ot_lp import build_cost_matrix, solve_kantorovich, total_variation

SCHEMA_VERSION = "1"


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on bad flags, per the CLI contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _emit(report: dict, out_path):
    text = json.dumps(_jsonable(report), indent=2, allow_nan=False)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _resolve_seed(seed):
    if seed is not None:
        return int(seed)
    return int.from_bytes(os.urandom(4), "little")


def _parse_ns(text: str):
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad n list {text!r}") from exc
    if not values:
        raise ValidationError("empty n list")
    return values


def _parse_model(text: str) -> clt_lab.SequenceModel:
    parts = text.split(":")
    if parts[0] == "iid" and len(parts) >= 2:
        name = parts[1]
        if name == "rademacher":
            scale = float(parts[2]) if len(parts) > 2 else 1.0
            return clt_lab.SequenceModel.iid_rademacher(scale)
        if name == "gaussian":
            return clt_lab.SequenceModel.iid_gaussian()
        if name == "uniform":
            if len(parts) < 3 or "," not in parts[2]:
                raise ValidationError("uniform model needs bounds, e.g. iid:uniform:-1,1")
            a, b = (float(v) for v in parts[2].split(","))
            return clt_lab.SequenceModel.iid_uniform(a, b)
    if parts[0] == "ar1" and len(parts) == 2:
        return clt_lab.SequenceModel.ar1(float(parts[1]))
    raise ValidationError(f"unknown model spec {text!r}")


def _load_finite_measure(path: str) -> DiscreteMeasure:
    measure = load_measure(path)
    if isinstance(measure, Distribution1D):
        if measure.is_gaussian:
            raise ValidationError("the LP solver needs finite-support measures")
        return measure.to_measure()
    return measure


def _load_distribution(path: str) -> Distribution1D:
    measure = load_measure(path)
    if isinstance(measure, DiscreteMeasure):
        return measure.to_distribution()
    return measure


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_dist(args) -> int:
    mu = _load_finite_measure(args.mu)
    nu = _load_finite_measure(args.nu)
    cost = parse_cost_spec(args.cost)
    matrix = build_cost_matrix(mu, nu, cost)
    result = solve_kantorovich(mu, nu, matrix, method=args.method)
    if args.coupling:
        with open(args.coupling, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(result.to_dict()), fh, indent=2)
            fh.write("\n")
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "dist",
        "config": {"mu": args.mu, "nu": args.nu, "cost": cost.name,
                   "method": args.method, "coupling": args.coupling},
        "tc": result.cost,
        "status": result.status,
        "iterations": result.iterations,
        "kernel": result.kernel,
        "certificate": {
            "passed": result.certificate.passed,
            "max_dual_violation": result.certificate.max_dual_violation,
            "max_slack_on_support": result.certificate.max_slack_on_support,
            "tol": result.certificate.tol,
        },
    }
    _emit(report, args.out)
    return 0


def _cmd_dist1d(args) -> int:
    f = _load_distribution(args.mu)
    g = _load_distribution(args.nu)
    if args.p is not None:
        value = wasserstein_p(f, g, args.p)
        mode = "wasserstein_p"
    else:
        cost = parse_cost_spec(args.cost)
        value = transport_cost_convex(f, g, cost)
        mode = "transport_cost"
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "dist1d",
        "config": {"mu": args.mu, "nu": args.nu, "p": args.p,
                   "cost": args.cost, "mode": mode},
        "distance": value,
    }
    if math.isinf(value):
        _emit(report, args.out)
        raise DivergenceError("distance diverged (+inf sentinel)")
    _emit(report, args.out)
    return 0


def _xn_rule(text: str):
    if text == "pow2":
        return "pow2"
    if text.startswith("const:"):
        return float(text.split(":", 1)[1])
    try:
        return float(text)
    except ValueError as exc:
        raise ValidationError(f"bad escaping-atom rule {text!r}") from exc


def _cmd_example1(args) -> int:
    cost = parse_cost_spec(args.cost)
    rule = _xn_rule(args.xn)
    ns = _parse_ns(args.ns) if args.ns else sorted(
        {min(2 ** k, args.n) for k in range(1, 11) if 2 ** k <= args.n} | {args.n})
    mu_n = convergence.example1_measure(args.n, rule, args.grid)
    limit = convergence.example1_limit(args.grid)
    divergence_report = convergence.example1_moment_divergence(ns, cost, rule, args.grid)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "example1",
        "config": {"n": args.n, "xn": args.xn, "cost": cost.name,
                   "grid": args.grid, "ns": ns, "tc": args.tc},
        "tv": convergence.example1_tv(args.n),
        "tv_discrete": total_variation(mu_n, limit),
        "moment_divergence": divergence_report.to_dict(),
    }
    if args.tc != "none":
        seq = convergence.example1_sequence(rule, ns, args.grid)
        tc_cost = cost if cost.convex else None
        if args.tc == "exact" and tc_cost is None:
            raise ValidationError("exact tc route needs a convex cost")
        curve = []
        for n in ns:
            tc = convergence._transport_distance(
                seq.generator(n), seq.limit, cost, args.tc)
            curve.append({"n": n, "tc": tc})
        report["tc_curve"] = curve
    _emit(report, args.out)
    return 0


def _build_family(text: str, ns, grid_step: float) -> convergence.MeasureSequence:
    if text == "delta":
        return convergence.delta_sequence(ns)
    if text == "example1:pow2":
        return convergence.example1_sequence("pow2", ns, grid_step)
    if text.startswith("example1:const:"):
        return convergence.example1_sequence(float(text.rsplit(":", 1)[1]), ns, grid_step)
    if text.startswith("random:"):
        parts = text.split(":")
        seed = int(parts[1])
        kind = parts[2] if len(parts) > 2 else "both"
        return convergence.random_converging_sequence(seed, ns, kind)
    raise ValidationError(f"unknown family {text!r}")


def _cmd_theorem2(args) -> int:
    cost = parse_cost_spec(args.cost)
    ns = _parse_ns(args.ns)
    seq = _build_family(args.family, ns, args.grid)
    thresholds = convergence.Thresholds(weak=args.threshold_a, moment=args.threshold_b,
                                        tc=args.threshold_tc)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "theorem2",
        "config": {"family": args.family, "cost": cost.name, "a": args.a,
                   "ns": ns, "grid": args.grid, "direction": args.direction,
                   "route": args.route,
                   "thresholds": thresholds.to_dict()},
    }
    if args.direction in ("forward", "both", "all"):
        report["forward"] = convergence.theorem2_forward(
            seq, cost, args.a, thresholds, tc_method=args.route,
            grid_step=args.grid).to_dict()
    if args.direction in ("converse", "both", "all"):
        report["converse"] = convergence.theorem2_converse(
            seq, cost, thresholds, tc_method=args.route,
            grid_step=args.grid).to_dict()
    if args.direction in ("corollary1", "all"):
        report["corollary1"] = convergence.corollary1_equivalence(
            seq, cost, args.a, thresholds).to_dict()
    _emit(report, args.out)
    return 0


def _cmd_clt(args) -> int:
    model = _parse_model(args.model)
    seed = _resolve_seed(args.seed)
    cost = parse_cost_spec(args.cost) if args.cost else None
    config = clt_lab.ExperimentConfig(
        model, _parse_ns(args.ns), args.m, seed,
        p=args.p if cost is None else None, cost=cost, threads=args.threads)
    result = clt_lab.run_experiment(config, delta=args.delta)
    report = {"schema_version": SCHEMA_VERSION, "command": "clt"}
    report.update(result.to_dict())
    _emit(report, args.out)
    if any(math.isinf(pt.dist) for pt in result.curve):
        raise DivergenceError("distance curve hit the divergence sentinel")
    return 0


def _cmd_check_cost(args) -> int:
    cost = parse_cost_spec(args.cost)
    lam = args.lam if args.lam is not None else cost.doubling_lambda
    grid = np.geomspace(args.grid_min, args.grid_max, args.grid_points)
    rng = np.random.default_rng(_resolve_seed(args.seed))
    triples = [tuple(v) for v in rng.uniform(-10, 10, size=(args.triples, 3))]
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "check-cost",
        "config": {"cost": cost.name, "lambda": lam,
                   "grid_min": args.grid_min, "grid_max": args.grid_max,
                   "grid_points": args.grid_points, "triples": args.triples,
                   "seed": args.seed},
        "flags": {"nondecreasing": cost.nondecreasing,
                  "zero_at_zero": cost.zero_at_zero,
                  "convex": cost.convex,
                  "continuous": cost.continuous,
                  "doubling_lambda": cost.doubling_lambda,
                  "growth_order": cost.growth_order},
    }
    if lam is not None:
        doubling = check_doubling(cost, lam, grid)
        report["doubling"] = {"lambda": lam, "holds": doubling.holds,
                              "worst_ratio": doubling.worst_ratio,
                              "witness": doubling.witness}
    split = check_split_inequality(cost, triples)
    report["split_inequality"] = {"checked": split.checked, "holds": split.holds,
                                  "violations": len(split.violations)}
    if cost.doubling_lambda is not None:
        rev = check_reverse_split(cost, triples)
        report["reverse_split"] = {"checked": rev.checked, "holds": rev.holds,
                                   "violations": len(rev.violations)}
    _emit(report, args.out)
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="transportlab",
                     description="Exact transportation distances, convergence "
                                 "diagnostics, and CLT experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="exact LP transport distance between finite measures")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--cost", required=True, help='cost spec: "power:2", "exp", "tv", "table:PATH"')
    p.add_argument("--method", default="auto", choices=["auto", "simplex", "hungarian"])
    p.add_argument("--coupling", default=None, help="write the optimal coupling JSON here")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("dist1d", help="closed-form 1D distance (quantile formula)")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--p", type=float, default=None, help="Wasserstein order")
    group.add_argument("--cost", default=None, help="convex cost spec")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_dist1d)

    p = sub.add_parser("example1", help="escaping-atom mixture family diagnostics")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--xn", default="pow2", help='"pow2" or "const:VALUE"')
    p.add_argument("--cost", default="exp")
    p.add_argument("--grid", type=float, default=1e-3, help="grid step for the uniform part")
    p.add_argument("--ns", default=None, help="comma list of n for the moment sequence")
    p.add_argument("--tc", default="none", choices=["none", "auto", "lp", "exact"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_example1)

    p = sub.add_parser("theorem2", help="forward/converse convergence diagnostics")
    p.add_argument("--family", required=True,
                   help='"delta", "example1:pow2", "example1:const:C", "random:SEED[:kind]"')
    p.add_argument("--cost", default="power:2")
    p.add_argument("--a", type=float, default=0.0, help="reference point for moments")
    p.add_argument("--ns", default="2,4,8,16,32,64,128,256,512,1024")
    p.add_argument("--grid", type=float, default=1e-3)
    p.add_argument("--direction", default="both",
                   choices=["forward", "converse", "both", "corollary1", "all"])
    p.add_argument("--route", default="auto", choices=["auto", "lp", "exact"])
    p.add_argument("--threshold-a", dest="threshold_a", type=float, default=1e-2)
    p.add_argument("--threshold-b", dest="threshold_b", type=float, default=1e-2)
    p.add_argument("--threshold-tc", dest="threshold_tc", type=float, default=1e-2)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_theorem2)

    p = sub.add_parser("clt", help="Monte Carlo distance-to-Gaussian experiment")
    p.add_argument("--model", required=True,
                   help='"iid:rademacher[:SCALE]", "iid:gaussian", "iid:uniform:A,B", "ar1:PHI"')
    p.add_argument("--ns", default="4,16,64,256")
    p.add_argument("--m", type=int, default=100_000, help="replications per n")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--cost", default=None, help="convex cost (overrides --p)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--delta", type=float, default=1.0, help="moment slack for decay conditions")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_clt)

    p = sub.add_parser("check-cost", help="structural checks for a cost function")
    p.add_argument("--cost", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--grid-min", dest="grid_min", type=float, default=1e-6)
    p.add_argument("--grid-max", dest="grid_max", type=float, default=1e6)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=1000)
    p.add_argument("--triples", type=int, default=100)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_check_cost)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except ValidationError as exc:
        sys.stderr.write(f"transportlab: validation error: {exc}\n")
        return 1
    except DivergenceError as exc:
        sys.stderr.write(f"transportlab: numerical failure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
