"""Command-line entry point: ``l1stab {solve,certify,constants,oracle,experiment}``.

Index sets in JSON output are 1-based.
"""

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import bounds, harness, l0, rsp
from .l1solver import (InfeasibleProblem, NumericalFailure, assemble_theta, solve_l1,
                       stack_u, theta_residual)
from .polytope import build_p0, gap_proxy
from .problem import ProblemData, validate

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_CERT_FAILS = 3
EXIT_INPUT = 4
EXIT_NUMERICAL = 5


class InputError(Exception):
    pass


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


C_RANK = "C = [A; B] rank-deficient"
log = logging.getLogger("l1stab")


def _load_problem(path, need_c_rank=True):
    """Parse and validate; the rank of C only matters for the stability constants."""
    try:
        p = ProblemData.from_dict(_read_json(path))
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc
    issues = validate(p)
    if not need_c_rank and C_RANK in issues:
        issues.remove(C_RANK)
        log.warning("%s; solving anyway", C_RANK)
    if issues:
        raise InputError("invalid problem: " + "; ".join(issues))
    return p


def _parse_norms(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--norms expects c,d,dhat")
    try:
        return tuple(math.inf if s.strip().lower() in ("inf", "infinity") else float(s)
                     for s in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _emit(obj, out):
    text = json.dumps(obj, indent=2, default=_json_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


def cmd_solve(args):
    p = _load_problem(args.problem, need_c_rank=False)
    P = build_p0(p.m, args.facets, seed=args.seed)
    try:
        primal, dual, value = solve_l1(p, P)
    except InfeasibleProblem as exc:
        _emit({"status": "INFEASIBLE", "message": str(exc)}, args.out)
        return EXIT_INFEASIBLE
    _, res = theta_residual(assemble_theta(p, P), stack_u(primal, dual))
    _emit({"status": "OPTIMAL", "x": primal.x, "value": value, "w": dual.to_dict(),
           "theta_residual": res, "facets": P.N}, args.out)
    return EXIT_OK


def cmd_certify(args):
    d = _read_json(args.problem)
    if "A" not in d:
        raise InputError("problem needs at least the matrix 'A'")
    A = np.atleast_2d(np.asarray(d["A"], dtype=float))
    B = None if args.weak else d.get("B")
    if args.k is None:
        raise InputError("--k is required")
    cert = rsp.certify_restricted(A, B, args.k)
    out = cert.to_json()
    out["weak"] = bool(args.weak or not B)
    _emit(out, args.out)
    return EXIT_OK if cert.holds else EXIT_CERT_FAILS


def cmd_constants(args):
    p = _load_problem(args.problem)
    c, d, dhat = args.norms
    const = bounds.compute_constants(p, c, d, dhat)
    out = const.to_dict()
    if args.samples:
        P = build_p0(p.m, args.facets, seed=args.seed)
        out["sigma_est"] = bounds.estimate_robinson(assemble_theta(p, P), args.samples,
                                                    seed=args.seed)
        gap, kind = gap_proxy(P, seed=args.seed)
        out["eps_prime_proxy"] = bounds.eps_prime_proxy(p, gap)
        out["gap_kind"] = kind
    _emit(out, args.out)
    return EXIT_OK


def cmd_oracle(args):
    p = _load_problem(args.problem, need_c_rank=False)
    P = build_p0(p.m, args.facets, seed=args.seed)
    try:
        res = l0.solve_l0(p, P, args.k)
    except l0.NoFeasibleSupport as exc:
        _emit({"status": "INFEASIBLE", "message": str(exc)}, args.out)
        return EXIT_INFEASIBLE
    _emit(res.to_json(), args.out)
    return EXIT_OK


def cmd_experiment(args):
    try:
        cfg = harness.ExperimentConfig.load(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc
    records = harness.run_experiment(cfg, workers=args.workers)
    text = harness.records_to_csv(records)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="l1stab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, problem=True):
        if problem:
            sp.add_argument("--problem", required=True, metavar="PATH")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("solve", help="solve the polytope-relaxed l1 problem")
    common(sp)
    sp.add_argument("--facets", type=int, default=64)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("certify", help="certify the (restricted) weak RSP of order k")
    common(sp)
    sp.add_argument("--k", type=int)
    sp.add_argument("--weak", action="store_true", help="ignore B")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("constants", help="stability constants of an instance")
    common(sp)
    sp.add_argument("--norms", type=_parse_norms, default=(1.0, 1.0, 1.0))
    sp.add_argument("--facets", type=int, default=16)
    sp.add_argument("--samples", type=int, default=0,
                    help="Robinson-constant samples (0 skips the estimate)")
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("oracle", help="exhaustive l0 solve")
    common(sp)
    sp.add_argument("--facets", type=int, default=64)
    sp.add_argument("--k", type=int, default=None, help="largest support size tried")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("experiment", help="run the randomized stability experiment")
    sp.add_argument("--config", required=True, metavar="PATH")
    sp.add_argument("--out", metavar="PATH")
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (InputError, rsp.PatternBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
