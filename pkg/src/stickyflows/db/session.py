"""Database session management for the run ledger.

The ledger is a SQLite file at <out>/ledger.db. Engines and session
factories are cached per resolved path.
"""

from __future__ import annotations

from collections.abc import Generator
from contextlib import contextmanager
from pathlib import Path

from sqlalchemy import Engine, create_engine
from sqlalchemy.orm import Session, sessionmaker

from stickyflows.db.schema import Base

LEDGER_FILENAME = "ledger.db"

# Module-level engine cache for connection pooling
_engine_cache: dict[str, Engine] = {}

# Module-level session factory cache
_session_factory_cache: dict[str, sessionmaker] = {}


def ledger_path(out_dir: Path) -> Path:
    return Path(out_dir) / LEDGER_FILENAME


def get_engine(db_path: Path) -> Engine:
    """Get a cached SQLAlchemy engine for the ledger file.

    Args:
        db_path: Path to the SQLite database file.

    Returns:
        SQLAlchemy engine instance (cached).
    """
    db_path = Path(db_path)
    cache_key = str(db_path.resolve())

    if cache_key in _engine_cache:
        return _engine_cache[cache_key]

    # Create parent directories only when creating a new engine
    db_path.parent.mkdir(parents=True, exist_ok=True)

    engine = create_engine(f"sqlite:///{db_path}", echo=False)
    _engine_cache[cache_key] = engine

    return engine


def _get_session_factory(db_path: Path) -> sessionmaker:
    cache_key = str(Path(db_path).resolve())

    if cache_key in _session_factory_cache:
        return _session_factory_cache[cache_key]

    factory = sessionmaker(bind=get_engine(db_path))
    _session_factory_cache[cache_key] = factory

    return factory


def get_session(db_path: Path) -> Session:
    """Get a ledger session. Caller is responsible for closing it."""
    return _get_session_factory(db_path)()


@contextmanager
def get_db_session(db_path: Path) -> Generator[Session, None, None]:
    """Context manager for ledger sessions with automatic cleanup.

    Commits on successful exit, rolls back on exception, and always
    closes the session.

    Example:
        with get_db_session(ledger_path(out)) as session:
            repo.create_run(session, entity)
    """
    session = get_session(db_path)
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def init_db(db_path: Path) -> None:
    """Create ledger tables if they do not exist."""
    Base.metadata.create_all(get_engine(db_path))
