"""
Database Configuration and Session Management
Sets up SQLAlchemy for the optional run-history store (SQLite by default)
"""

from functools import lru_cache
from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

# Base class for declarative models
Base = declarative_base()


def normalize_url(url: str) -> str:
    """Accept a bare file path as shorthand for a SQLite database"""
    return url if "://" in url else f"sqlite:///{url}"


@lru_cache(maxsize=8)
def get_engine(url: str) -> Engine:
    """Create (once per URL) the SQLAlchemy engine"""
    url = normalize_url(url)
    return create_engine(
        url,
        connect_args={"check_same_thread": False} if url.startswith("sqlite") else {},
        echo=False  # Set to True for SQL query logging
    )


def init_db(url: str) -> Engine:
    """
    Initialize database - create all tables

    Args:
        url: SQLAlchemy URL or SQLite file path

    Returns:
        The engine bound to the database
    """
    # Register table classes on Base before create_all
    from flmsolver.models import run_record  # noqa: F401

    engine = get_engine(url)
    Base.metadata.create_all(bind=engine)
    return engine


def get_session(url: Optional[str]) -> Optional[Session]:
    """
    Open a session on the run-history database

    Returns None when no database is configured.
    """
    if not url:
        return None
    engine = init_db(url)
    SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    return SessionLocal()
