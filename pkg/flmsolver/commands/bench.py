"""
Bench Command - Seeded sweep of generated instances across modes
One CSV row per (instance, mode, trial seed); failures become rows whose
status names the error
"""

import argparse
import csv
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

import numpy as np

from flmsolver.config import get_settings
from flmsolver.errors import FlmError, PreconditionError
from flmsolver.models import crud
from flmsolver.models.database import get_session
from flmsolver.models.instance import FlmInstance
from flmsolver.models.reports import PipelineConfig, RunRecord
from flmsolver.services.instances import generate_euclidean
from flmsolver.services.lp import FlmLpResult, solve_lp_flm
from flmsolver.services.oracle import exact_solve
from flmsolver.services.pipeline import solve
from flmsolver.utils.logger import log_performance, logger

HEADER = [
    "instance", "mode", "lambda", "seed", "nu", "lp_value", "cost", "exact", "ratio_lp",
    "ratio_exact", "cuts", "reroute_iters", "ms_lp", "ms_round", "status",
]

PRESETS: Dict[str, Dict] = {
    # 34 instances x 3 modes x 5 seeds = 510 rows
    "desk": {
        "nf": 4, "nc": 8, "p": 0.4, "instances": 34, "seeds": 5, "perfect": True,
        "modes": "general,perfect-reroute,perfect-direct",
    },
}

MODES = ("general", "perfect-reroute", "perfect-direct", "auto")

DEFAULTS = {"nf": 4, "nc": 8, "p": 0.5, "instances": 10, "seeds": 3, "perfect": False,
            "modes": "general,perfect-direct"}


def register(subparsers) -> None:
    parser = subparsers.add_parser("bench", help="benchmark sweep, CSV on stdout")
    parser.add_argument("--preset", choices=sorted(PRESETS), default=None)
    parser.add_argument("--modes", default=None, help="comma-separated pipeline modes")
    parser.add_argument("--lambda", dest="lam", type=float, default=None, help="λ for every mode (default per mode)")
    parser.add_argument("--nf", type=int, default=None)
    parser.add_argument("--nc", type=int, default=None)
    parser.add_argument("--p", type=float, default=None, help="edge probability")
    parser.add_argument("--perfect", action="store_true", default=None, help="plant a perfect matching")
    parser.add_argument("--instances", type=int, default=None)
    parser.add_argument("--seeds", type=int, default=None, help="rounding seeds per instance and mode")
    parser.add_argument("--seed", type=int, default=0, help="sweep seed")
    parser.add_argument("--jobs", type=int, default=None, help="threads across instances")
    parser.add_argument("-o", "--output", default=None, help="CSV file (stdout when omitted)")
    parser.set_defaults(func=run)


def _resolve(args: argparse.Namespace) -> Dict:
    params = dict(DEFAULTS)
    if args.preset:
        params.update(PRESETS[args.preset])
    for key in ("nf", "nc", "p", "instances", "seeds", "perfect", "modes"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    params["modes"] = [m.strip() for m in params["modes"].split(",") if m.strip()]
    unknown = [m for m in params["modes"] if m not in MODES]
    if unknown:
        raise PreconditionError(f"unknown bench mode(s): {', '.join(unknown)}")
    if params["instances"] < 0 or params["seeds"] < 1:
        raise PreconditionError("need --instances >= 0 and --seeds >= 1")
    return params


def instance_seed(sweep_seed: int, index: int) -> int:
    """Instance seed derived from (sweep seed, instance index)"""
    return int(np.random.SeedSequence([sweep_seed, index]).generate_state(1)[0])


def _ratio(cost: Optional[float], base: Optional[float]) -> Optional[float]:
    if cost is None or base is None:
        return None
    if base <= 1e-12:
        return 1.0 if cost <= 1e-12 else None
    return cost / base


def _instance_rows(index: int, params: Dict, sweep_seed: int, lam: Optional[float]) -> List[RunRecord]:
    name = f"euc-{index}"
    seed = instance_seed(sweep_seed, index)
    rows: List[RunRecord] = []
    try:
        inst = generate_euclidean(params["nf"], params["nc"], params["p"], seed=seed,
                                  ensure_perfect=params["perfect"])
        lp = solve_lp_flm(inst)
    except FlmError as e:
        logger.warning(f"Bench | {name} | {type(e).__name__}: {e}")
        return [RunRecord(instance=name, mode=m, lam=lam or 0.0, seed=seed, status=f"error:{type(e).__name__}")
                for m in params["modes"]]

    exact = _exact(inst)
    for mode in params["modes"]:
        rows.extend(_mode_rows(name, inst, lp, exact, mode, seed, params["seeds"], lam))
    return rows


def _exact(inst: FlmInstance) -> Optional[float]:
    if inst.n_facilities > get_settings().oracle_facility_cap:
        return None
    try:
        return exact_solve(inst).optimum
    except FlmError as e:
        logger.warning(f"Bench | exact skipped: {e}")
        return None


def _mode_rows(
    name: str, inst: FlmInstance, lp: FlmLpResult, exact: Optional[float],
    mode: str, seed: int, seeds: int, lam: Optional[float],
) -> List[RunRecord]:
    try:
        cfg = PipelineConfig(mode=mode, lam=lam, seed=seed, trials=seeds, jobs=1)
        report = solve(inst, cfg, lp)
    except FlmError as e:
        logger.warning(f"Bench | {name} | {mode} | {type(e).__name__}: {e}")
        return [RunRecord(instance=name, mode=mode, lam=lam or 0.0, seed=seed, nu=lp.nu, lp_value=lp.value,
                          exact=exact, cuts=lp.cuts, status=f"error:{type(e).__name__}")]

    ms_round = report.timings.get("ms_round", 0.0) / max(1, len(report.trial_costs))
    iters = report.reroute.iterations if report.reroute else 0
    return [
        RunRecord(
            instance=name, mode=report.mode, lam=report.lam, seed=trial_seed, nu=report.nu,
            lp_value=report.lp_value, cost=cost, exact=exact,
            ratio_lp=_ratio(cost, report.lp_value), ratio_exact=_ratio(cost, exact),
            cuts=report.cuts, reroute_iters=iters, ms_lp=report.timings.get("ms_lp", 0.0),
            ms_round=ms_round,
        )
        for trial_seed, cost in zip(report.trial_seeds, report.trial_costs)
    ]


def sweep(params: Dict, sweep_seed: int = 0, lam: Optional[float] = None, jobs: int = 1) -> List[RunRecord]:
    """
    Run the benchmark sweep

    Args:
        params: nf, nc, p, perfect, instances, seeds, modes
        sweep_seed: Seed every instance seed is derived from
        lam: λ for every mode (None for the per-mode default)
        jobs: Threads across instances; row order does not depend on it

    Returns:
        RunRecords in (instance, mode, seed) order
    """
    indices = range(params["instances"])

    def run_one(index: int) -> List[RunRecord]:
        return _instance_rows(index, params, sweep_seed, lam)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            per_instance = list(executor.map(run_one, indices))
    else:
        per_instance = [run_one(i) for i in indices]
    return [row for rows in per_instance for row in rows]


def write_csv(records: List[RunRecord], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(HEADER)
    for record in records:
        data = record.model_dump(by_alias=True)
        writer.writerow(["" if data[k] is None else data[k] for k in HEADER])


def run(args: argparse.Namespace) -> int:
    params = _resolve(args)
    jobs = args.jobs or get_settings().jobs
    start = time.perf_counter()
    records = sweep(params, args.seed, args.lam, jobs)
    log_performance("bench", time.perf_counter() - start, len(records))

    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_csv(records, fh)
    else:
        write_csv(records, sys.stdout)

    db = get_session(args.database_url)
    if db is not None and records:
        try:
            crud.create_run_records(db, records)
        finally:
            db.close()
    failed = sum(1 for r in records if r.status != "ok")
    logger.info(f"Bench | Rows: {len(records)} | Failed: {failed}")
    return 0
