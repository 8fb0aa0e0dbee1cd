"""
CRUD Operations - Database operations for persisted runs
"""

from typing import List, Optional

from sqlalchemy.orm import Session

from flmsolver.models.reports import RunRecord
from flmsolver.models.run_record import RunRecordRow


# ============= RUN RECORD OPERATIONS =============

def create_run_record(db: Session, record: RunRecord) -> RunRecordRow:
    """
    Persist a run record

    Args:
        db: Database session
        record: Run to store

    Returns:
        Created RunRecordRow
    """
    row = RunRecordRow(**record.model_dump(by_alias=False))
    db.add(row)
    db.commit()
    db.refresh(row)
    return row


def create_run_records(db: Session, records: List[RunRecord]) -> int:
    """Persist many run records in one transaction"""
    db.add_all([RunRecordRow(**r.model_dump(by_alias=False)) for r in records])
    db.commit()
    return len(records)


def get_run(db: Session, run_id: int) -> Optional[RunRecordRow]:
    """Get run by ID"""
    return db.query(RunRecordRow).filter(RunRecordRow.id == run_id).first()


def get_recent_runs(db: Session, limit: int = 20, instance: Optional[str] = None) -> List[RunRecordRow]:
    """Get most recent runs, optionally for one instance"""
    query = db.query(RunRecordRow)
    if instance:
        query = query.filter(RunRecordRow.instance == instance)
    return query.order_by(RunRecordRow.id.desc()).limit(limit).all()


def row_to_record(row: RunRecordRow) -> dict:
    """Plain dict of a stored run, keyed like the bench CSV"""
    data = RunRecord(
        instance=row.instance, mode=row.mode, lam=row.lam, seed=row.seed, nu=row.nu,
        lp_value=row.lp_value, cost=row.cost, exact=row.exact, ratio_lp=row.ratio_lp,
        ratio_exact=row.ratio_exact, cuts=row.cuts, reroute_iters=row.reroute_iters,
        ms_lp=row.ms_lp, ms_round=row.ms_round, status=row.status,
    ).model_dump(by_alias=True)
    data["id"] = row.id
    data["created_at"] = row.created_at.isoformat() if row.created_at else None
    return data
