"""
Gap Command - Exact optimum against one or more LP relaxations
"""

import argparse
import math
import sys

from flmsolver.errors import PreconditionError
from flmsolver.models.reports import GapReport
from flmsolver.services.instances import validate_instance
from flmsolver.services.lp import solve_lp_flm
from flmsolver.services.oracle import exact_solve
from flmsolver.utils.instance_io import read_instance, to_json

RELAXATIONS = ("full", "weak-flow", "degree-only")


def register(subparsers) -> None:
    parser = subparsers.add_parser("gap", help="integrality gap of an instance")
    parser.add_argument("instance", help="instance JSON file")
    parser.add_argument("--relaxations", default="full",
                        help="comma-separated subset of full,weak-flow,degree-only")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    names = [r.strip() for r in args.relaxations.split(",") if r.strip()]
    unknown = [r for r in names if r not in RELAXATIONS]
    if unknown or not names:
        raise PreconditionError(f"unknown relaxation(s): {', '.join(unknown) or '(none given)'}")
    inst = read_instance(args.instance)
    violations = validate_instance(inst)
    if violations:
        raise PreconditionError(f"invalid instance: {violations[0]}")

    exact = exact_solve(inst).optimum
    lp, gap = {}, {}
    for name in names:
        value = solve_lp_flm(inst, relaxation=name).value
        lp[name] = value
        if value > 1e-12:
            gap[name] = exact / value
        else:
            gap[name] = 1.0 if exact <= 1e-12 else math.inf

    sys.stdout.write(to_json(GapReport(exact=exact, lp=lp, gap=gap)) + "\n")
    return 0
