"""Command line: ``nllmp {solve,verify,generate,reduce}``.

Exit codes: 0 success, 1 verification or optimization failure, 2 usage or
parse error.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time

import numpy as np

from . import reductions
from .estimator import ALGORITHMS, NLLMPSolver
from .init import INIT_METHODS
from .io import (SPEC_TYPES, ParseError, generate_random, parse_instance, parse_solution,
                 parse_spec, serialize_instance, serialize_solution)
from .model import is_feasible, objective_of, repair
from .oracle import MAX_INEQUALITY_NODES, find_violated_inequality

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Fail(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _read(path):
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise _Fail(f"cannot read {path}: {exc.strerror}", EXIT_USAGE) from None


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Fail(f"cannot write {path}: {exc.strerror}", EXIT_USAGE) from None


def _load_instance(path):
    try:
        return parse_instance(_read(path))
    except ParseError as exc:
        raise _Fail(f"{path}: {exc}", EXIT_USAGE) from None


def cmd_solve(args):
    instance = _load_instance(args.instance)
    est = NLLMPSolver(algorithm=args.algorithm, init=args.init, time_limit=args.time_limit,
                      max_iter=args.max_iter)
    t0 = time.perf_counter()
    try:
        est.fit(instance)
    except ValueError as exc:
        raise _Fail(str(exc), EXIT_USAGE) from None
    wall = time.perf_counter() - t0
    sol = est.solution_
    sol.metadata.update(seed=args.seed, wall_time=wall)
    if est.trace_ is not None:
        sol.metadata["truncated"] = "true" if est.trace_.truncated else "false"
    _write(args.output, serialize_solution(sol))
    if args.trace:
        rows = est.trace_.rows() if est.trace_ is not None else [(wall, sol.objective)]
        try:
            with open(args.trace, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["elapsed_seconds", "objective"])
                w.writerows((repr(float(t)), repr(float(o))) for t, o in rows)
        except OSError as exc:
            raise _Fail(f"cannot write {args.trace}: {exc.strerror}", EXIT_USAGE) from None
    if not sol.feasible:
        raise _Fail("solver returned an infeasible decomposition", EXIT_FAIL)
    print(f"objective {sol.objective:g}", file=sys.stderr)
    return EXIT_OK


def verify_solution(instance, sol, max_nodes=MAX_INEQUALITY_NODES):
    """List of problems found with ``sol``; empty when it passes."""
    problems = []
    n = instance.num_nodes
    if len(sol.labels) != n:
        return [f"solution has {len(sol.labels)} nodes, instance has {n}"]
    bad = np.flatnonzero(sol.labels >= instance.num_labels)
    if len(bad):
        return [f"node {bad[0]} has label {sol.labels[bad[0]]}, "
                f"instance has {instance.num_labels} labels"]
    value = objective_of(instance, sol.labels, sol.components)
    if not math.isclose(value, sol.objective, rel_tol=1e-9, abs_tol=1e-9):
        problems.append(f"objective mismatch: file says {sol.objective!r}, recomputed {value!r}")
    feasible = is_feasible(instance, sol.components)
    if not feasible:
        pieces = repair(instance, sol.components)
        for m in np.unique(sol.components).tolist():
            parts = np.unique(pieces[sol.components == m])
            if len(parts) > 1:
                nodes = np.flatnonzero(sol.components == m).tolist()
                problems.append(f"component {m} {nodes} is not connected "
                                f"({len(parts)} pieces)")
                break
    if n <= max_nodes:
        y = sol.components[instance.arcs[:, 0]] != sol.components[instance.arcs[:, 1]]
        witness = find_violated_inequality(instance, y, max_nodes)
        if witness is not None:
            problems.append(f"violated inequality: {witness}")
    if sol.feasible != feasible:
        problems.append(f"feasible flag is {str(sol.feasible).lower()}, "
                        f"actual {str(feasible).lower()}")
    return problems


def cmd_verify(args):
    instance = _load_instance(args.instance)
    try:
        sol = parse_solution(_read(args.solution))
    except ParseError as exc:
        raise _Fail(f"{args.solution}: {exc}", EXIT_USAGE) from None
    problems = verify_solution(instance, sol)
    for p in problems:
        print(p)
    if problems:
        print("FAIL")
        return EXIT_FAIL
    print(f"OK objective {sol.objective:g}")
    return EXIT_OK


def cmd_generate(args):
    try:
        inst = generate_random(args.seed, args.nodes, args.edge_density, args.lift_density,
                               args.labels, (args.cost_min, args.cost_max))
    except ValueError as exc:
        raise _Fail(str(exc), EXIT_USAGE) from None
    _write(args.output, serialize_instance(inst))
    return EXIT_OK


_BUILDERS = {"uiqp": reductions.from_uiqp, "lmp": reductions.from_lmp,
             "pose": reductions.from_pose, "tracking": reductions.from_tracking}


def cmd_reduce(args):
    try:
        spec = parse_spec(args.kind, _read(args.spec))
        inst = _BUILDERS[args.kind](spec)
    except ValueError as exc:  # ParseError and InstanceError included
        raise _Fail(f"{args.spec}: {exc}", EXIT_USAGE) from None
    _write(args.output, serialize_instance(inst))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="nllmp",
                                description="Node-labeling lifted multicut solver.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("-o", "--output", help="solution file (default: stdout)")
    s.add_argument("--algorithm", choices=ALGORITHMS, default="kljr")
    s.add_argument("--init", choices=INIT_METHODS, default="gaec")
    s.add_argument("--seed", type=int, default=0,
                   help="recorded in the output; the solvers are deterministic")
    s.add_argument("--time-limit", type=float, help="seconds")
    s.add_argument("--max-iter", type=int)
    s.add_argument("--trace", help="write elapsed_seconds,objective rows to this CSV")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution against an instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("generate", help="write a random connected instance")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--labels", type=int, default=2)
    g.add_argument("--edge-density", type=float, default=0.3)
    g.add_argument("--lift-density", type=float, default=0.2)
    g.add_argument("--cost-min", type=int, default=-10)
    g.add_argument("--cost-max", type=int, default=10)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("reduce", help="convert a JSON special-case spec to an instance")
    r.add_argument("--from", dest="kind", choices=sorted(SPEC_TYPES), required=True)
    r.add_argument("spec")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reduce)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"nllmp {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
