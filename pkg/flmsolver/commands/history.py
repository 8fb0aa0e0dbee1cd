"""
History Command - Recently persisted runs
"""

import argparse
import sys

from flmsolver.errors import PreconditionError
from flmsolver.models import crud
from flmsolver.models.database import get_session
from flmsolver.utils.instance_io import to_json


def register(subparsers) -> None:
    parser = subparsers.add_parser("history", help="print recent runs from the database")
    parser.add_argument("--limit", type=int, default=20)
    parser.add_argument("--instance", default=None, help="only runs of this instance")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    db = get_session(args.database_url)
    if db is None:
        raise PreconditionError("no database configured (use --db or FLM_DATABASE_URL)")
    try:
        rows = crud.get_recent_runs(db, limit=args.limit, instance=args.instance)
        records = [crud.row_to_record(row) for row in rows]
    finally:
        db.close()
    sys.stdout.write(to_json(records) + "\n")
    return 0
