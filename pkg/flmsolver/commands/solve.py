"""
Solve Command - Run a pipeline, the LP alone, or the exact oracle on one instance
"""

import argparse
import sys
import time
from pathlib import Path
from typing import Optional

from flmsolver.errors import PreconditionError
from flmsolver.models import crud
from flmsolver.models.database import get_session
from flmsolver.models.reports import LpReport, PipelineConfig, PipelineReport, RunRecord
from flmsolver.services.instances import validate_instance
from flmsolver.services.lp import flm_costs, solve_lp_flm, write_lp_format
from flmsolver.services.oracle import exact_solve
from flmsolver.services.pipeline import solve
from flmsolver.services.reroute import write_trace
from flmsolver.utils.instance_io import read_instance, to_json, write_json
from flmsolver.utils.logger import logger

MODES = ["general", "perfect-reroute", "perfect-direct", "auto", "lp-only", "exact"]


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve", help="solve one instance and print the report")
    parser.add_argument("instance", help="instance JSON file")
    parser.add_argument("--mode", choices=MODES, default="auto")
    parser.add_argument("--lambda", dest="lam", type=float, default=None, help="scaling parameter (>= 1.678)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=1)
    parser.add_argument("--jobs", type=int, default=None, help="threads for the trials")
    parser.add_argument("--deterministic", action="store_true", help="threshold rounding instead of sampling")
    parser.add_argument("--relaxation", choices=["full", "weak-flow", "degree-only"], default="full",
                        help="LP variant (lp-only)")
    parser.add_argument("--lp-dump", metavar="FILE", default=None, help="write the final LP in CPLEX-LP format")
    parser.add_argument("--trace", metavar="FILE", default=None, help="write reroute iterations as JSON lines")
    parser.add_argument("-o", "--output", default=None, help="also write the report to a file")
    parser.set_defaults(func=run)


def _persist(url: Optional[str], record: RunRecord) -> None:
    db = get_session(url)
    if db is None:
        return
    try:
        crud.create_run_record(db, record)
    finally:
        db.close()


def run(args: argparse.Namespace) -> int:
    inst = read_instance(args.instance)
    violations = validate_instance(inst)
    if violations:
        raise PreconditionError(f"invalid instance: {violations[0]}")
    name = Path(args.instance).stem

    if args.mode == "exact":
        start = time.perf_counter()
        report = exact_solve(inst)
        record = RunRecord(instance=name, mode="exact", lam=0.0, seed=args.seed, nu=len(report.optimal_solution.matching),
                           cost=report.optimum, exact=report.optimum,
                           ms_round=(time.perf_counter() - start) * 1000.0)
    elif args.mode == "lp-only":
        lp = solve_lp_flm(inst, relaxation=args.relaxation)
        lp_open, lp_conn = flm_costs(inst, lp.frac)
        report = LpReport(
            lp_value=lp.value, lp_open=lp_open, lp_conn=lp_conn, nu=lp.nu, relaxation=lp.relaxation,
            cuts=lp.cuts, rounds=lp.rounds, history=lp.history,
            y=lp.frac.y.tolist(), x_edge=lp.frac.x_edge.tolist(),
        )
        if args.lp_dump and lp.lp is not None:
            Path(args.lp_dump).write_text(write_lp_format(lp.lp), encoding="utf-8")
        record = RunRecord(instance=name, mode="lp-only", lam=0.0, seed=args.seed, nu=lp.nu,
                           lp_value=lp.value, cuts=lp.cuts, ms_lp=lp.seconds * 1000.0)
    else:
        cfg = PipelineConfig(mode=args.mode, lam=args.lam, seed=args.seed, trials=args.trials,
                             deterministic=args.deterministic, jobs=args.jobs)
        lp = solve_lp_flm(inst)
        if args.lp_dump and lp.lp is not None:
            Path(args.lp_dump).write_text(write_lp_format(lp.lp), encoding="utf-8")
        report = solve(inst, cfg, lp)
        if args.trace and report.reroute is not None:
            write_trace(report.reroute, args.trace)
        record = _pipeline_record(name, report)

    logger.info(f"Solved | Instance: {name} | Mode: {record.mode}")
    sys.stdout.write(to_json(report) + "\n")
    if args.output:
        write_json(args.output, report)
    _persist(args.database_url, record)
    return 0


def _pipeline_record(name: str, report: PipelineReport) -> RunRecord:
    return RunRecord(
        instance=name, mode=report.mode, lam=report.lam, seed=report.seed, nu=report.nu,
        lp_value=report.lp_value, cost=report.cost,
        ratio_lp=report.cost / report.lp_value if report.lp_value > 1e-12 else None,
        cuts=report.cuts, reroute_iters=report.reroute.iterations if report.reroute else 0,
        ms_lp=report.timings.get("ms_lp", 0.0), ms_round=report.timings.get("ms_round", 0.0),
    )
