"""
Database Models - SQLAlchemy table for persisted solver runs
"""

from sqlalchemy import Column, DateTime, Float, Integer, String
from sqlalchemy.sql import func

from flmsolver.models.database import Base


class RunRecordRow(Base):
    """One solve or bench run"""
    __tablename__ = "run_records"

    id = Column(Integer, primary_key=True, autoincrement=True)
    created_at = Column(DateTime(timezone=True), server_default=func.now())
    instance = Column(String, nullable=False, index=True)
    mode = Column(String, nullable=False)
    lam = Column("lambda", Float, nullable=False)
    seed = Column(Integer, nullable=False)
    nu = Column(Integer, default=0)
    lp_value = Column(Float, nullable=True)
    cost = Column(Float, nullable=True)
    exact = Column(Float, nullable=True)
    ratio_lp = Column(Float, nullable=True)
    ratio_exact = Column(Float, nullable=True)
    cuts = Column(Integer, default=0)
    reroute_iters = Column(Integer, default=0)
    ms_lp = Column(Float, default=0.0)
    ms_round = Column(Float, default=0.0)
    status = Column(String, default="ok")

    def __repr__(self):
        return f"<RunRecordRow(id={self.id}, instance={self.instance}, mode={self.mode}, cost={self.cost})>"
