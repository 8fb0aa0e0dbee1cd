"""
Generate Command - Instance creation (fixtures, Euclidean sweeps, UFL reduction)
"""

import argparse
import sys

from flmsolver.services.instances import fixture, generate_euclidean, reduce_ufl_to_flm
from flmsolver.utils.instance_io import instance_to_json, read_ufl_instance, write_instance
from flmsolver.utils.logger import logger


def register(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="write an instance JSON")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--fixture", metavar="NAME", help="gap-2fac, colocated-unit, triangle-3-2 or collinear-3")
    source.add_argument("--euclidean", action="store_true", help="random points in a square")
    source.add_argument("--from-ufl", metavar="FILE", help="reduce a UFL instance by copying every client")
    parser.add_argument("--nf", type=int, default=4, help="facilities (--euclidean)")
    parser.add_argument("--nc", type=int, default=8, help="clients (--euclidean)")
    parser.add_argument("--p", type=float, default=0.5, help="edge probability (--euclidean)")
    parser.add_argument("--box", type=float, default=100.0, help="side of the square (--euclidean)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--perfect", action="store_true", help="plant a perfect matching (--euclidean)")
    parser.add_argument("-o", "--output", default=None, help="output file (stdout when omitted)")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    if args.fixture:
        inst = fixture(args.fixture)
    elif args.euclidean:
        inst = generate_euclidean(args.nf, args.nc, args.p, box_size=args.box, seed=args.seed,
                                  ensure_perfect=args.perfect)
    else:
        inst = reduce_ufl_to_flm(read_ufl_instance(args.from_ufl))

    logger.info(f"Generated | Facilities: {inst.n_facilities} | Clients: {inst.n_clients} | "
                f"Edges: {len(inst.edges)}")
    if args.output:
        write_instance(args.output, inst)
    else:
        sys.stdout.write(instance_to_json(inst) + "\n")
    return 0
