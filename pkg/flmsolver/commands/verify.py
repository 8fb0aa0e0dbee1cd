"""
Verify Command - Feasibility and cost check of a solution file
"""

import argparse
import sys

from flmsolver.services.instances import check_solution, validate_instance
from flmsolver.utils.instance_io import read_instance, read_solution, to_json


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="check a solution against an instance")
    parser.add_argument("instance", help="instance JSON file")
    parser.add_argument("solution", help="solution JSON (or any report embedding one)")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    """Exit 0 when the instance and solution are clean, 1 with the itemized list otherwise"""
    inst = read_instance(args.instance)
    sol = read_solution(args.solution)
    violations = [f"instance: {v}" for v in validate_instance(inst)]
    if not violations:
        violations = check_solution(inst, sol)

    result = {
        "valid": not violations,
        "violations": violations,
        "opening_cost": sol.opening_cost_total,
        "connection_cost": sol.connection_cost_total,
        "total_cost": sol.total_cost,
    }
    sys.stdout.write(to_json(result) + "\n")
    for v in violations:
        print(f"violation: {v}", file=sys.stderr)
    return 0 if not violations else 1
