"""Repository pattern for ledger operations.

Encapsulates all SQLAlchemy queries, keeping domain logic pure.
Returns domain models (not SQLAlchemy entities) to external callers.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import TYPE_CHECKING

from sqlalchemy.orm import Session

from stickyflows.db.schema import Artifact, Run
from stickyflows.models.domain import ArtifactEntity, RunEntity

if TYPE_CHECKING:
    from sqlalchemy.orm import Session as DbSession
else:
    DbSession = Session

# Re-export for external use
__all__ = ["DbSession"]


# ============================================================================
# Converters: SQLAlchemy -> Domain
# ============================================================================


def _run_to_entity(run: Run) -> RunEntity:
    """Convert SQLAlchemy Run to domain entity."""
    return RunEntity(
        run_id=run.run_id,
        subcommand=run.subcommand,
        config_hash=run.config_hash,
        config_json=run.config_json,
        seed=run.seed,
        workers=run.workers,
        status=run.status,
        status_badge=run.status_badge,
        reasons_json=run.reasons_json,
        started_at=run.started_at,
        ended_at=run.ended_at,
        error_code=run.error_code,
        error_detail=run.error_detail,
    )


def _artifact_to_entity(artifact: Artifact) -> ArtifactEntity:
    """Convert SQLAlchemy Artifact to domain entity."""
    return ArtifactEntity(
        artifact_id=artifact.artifact_id,
        run_id=artifact.run_id,
        kind=artifact.kind,
        path=artifact.path,
        sha256=artifact.sha256,
    )


# ============================================================================
# Run Repository
# ============================================================================


def get_run(session: DbSession, run_id: str) -> RunEntity | None:
    """Get run by ID."""
    run = session.query(Run).filter(Run.run_id == run_id).first()
    return _run_to_entity(run) if run else None


def get_runs_for_subcommand(session: DbSession, subcommand: str) -> list[RunEntity]:
    """Get all runs of one subcommand."""
    runs = session.query(Run).filter(Run.subcommand == subcommand).all()
    return [_run_to_entity(r) for r in runs]


def upsert_run(session: DbSession, entity: RunEntity) -> RunEntity:
    """Create the run row, or reset an existing one to the entity's state.

    Existing artifacts of the run are removed; a rerun writes them again.
    """
    run = session.query(Run).filter(Run.run_id == entity.run_id).first()
    if run is None:
        run = Run(run_id=entity.run_id)
        session.add(run)
    else:
        session.query(Artifact).filter(Artifact.run_id == entity.run_id).delete()
    run.subcommand = entity.subcommand
    run.config_hash = entity.config_hash
    run.config_json = entity.config_json
    run.seed = entity.seed
    run.workers = entity.workers
    run.status = entity.status
    run.status_badge = None
    run.reasons_json = None
    run.started_at = None
    run.ended_at = None
    run.error_code = None
    run.error_detail = None
    return entity


def update_run_status(
    session: DbSession,
    run_id: str,
    status: str,
    *,
    status_badge: str | None = None,
    reasons_json: str | None = None,
    error_code: str | None = None,
    error_detail: str | None = None,
) -> None:
    """Update run status and optional fields."""
    run = session.query(Run).filter(Run.run_id == run_id).first()
    if run:
        run.status = status
        if status_badge is not None:
            run.status_badge = status_badge
        if reasons_json is not None:
            run.reasons_json = reasons_json
        if error_code is not None:
            run.error_code = error_code
        if error_detail is not None:
            run.error_detail = error_detail


def set_run_started(session: DbSession, run_id: str) -> None:
    """Set run started_at timestamp."""
    run = session.query(Run).filter(Run.run_id == run_id).first()
    if run:
        run.status = "running"
        run.started_at = datetime.now(timezone.utc)


def set_run_ended(session: DbSession, run_id: str) -> None:
    """Set run ended_at timestamp."""
    run = session.query(Run).filter(Run.run_id == run_id).first()
    if run:
        run.ended_at = datetime.now(timezone.utc)


# ============================================================================
# Artifact Repository
# ============================================================================


def create_artifact(session: DbSession, entity: ArtifactEntity) -> ArtifactEntity:
    """Record an artifact file."""
    session.add(
        Artifact(
            artifact_id=entity.artifact_id,
            run_id=entity.run_id,
            kind=entity.kind,
            path=entity.path,
            sha256=entity.sha256,
        )
    )
    return entity


def get_artifacts_for_run(session: DbSession, run_id: str) -> list[ArtifactEntity]:
    """Get all artifacts of a run, ordered by path."""
    rows = session.query(Artifact).filter(Artifact.run_id == run_id).order_by(Artifact.path).all()
    return [_artifact_to_entity(a) for a in rows]


# ============================================================================
# Batch Operations
# ============================================================================


def commit(session: DbSession) -> None:
    """Commit current transaction."""
    session.commit()
