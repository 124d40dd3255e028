"""Tests for the run ledger schema and repository."""

import pytest
from sqlalchemy.exc import IntegrityError

from stickyflows.db import repo
from stickyflows.db.schema import Artifact, Run
from stickyflows.models.domain import ArtifactEntity, RunEntity


def run_entity(run_id="r1", status="queued"):
    return RunEntity(
        run_id=run_id,
        subcommand="theta",
        config_hash="c" * 64,
        config_json="{}",
        seed=0,
        workers=1,
        status=status,
    )


def artifact_entity(artifact_id, path, run_id="r1"):
    return ArtifactEntity(
        artifact_id=artifact_id, run_id=run_id, kind="csv", path=path, sha256="0" * 64
    )


class TestRunRepository:
    """Run rows and their lifecycle."""

    def test_upsert_creates_and_reads_back(self, session):
        repo.upsert_run(session, run_entity())
        repo.commit(session)
        run = repo.get_run(session, "r1")
        assert run.subcommand == "theta"
        assert run.status == "queued"

    def test_upsert_resets_existing_run(self, session):
        repo.upsert_run(session, run_entity())
        repo.create_artifact(session, artifact_entity("a1", "theta.csv"))
        repo.update_run_status(session, "r1", "failed", error_code="QuadratureError")
        repo.commit(session)
        repo.upsert_run(session, run_entity())
        repo.commit(session)
        run = repo.get_run(session, "r1")
        assert run.status == "queued"
        assert run.error_code is None
        assert repo.get_artifacts_for_run(session, "r1") == []

    def test_started_and_ended(self, session):
        repo.upsert_run(session, run_entity())
        repo.set_run_started(session, "r1")
        repo.set_run_ended(session, "r1")
        repo.commit(session)
        run = repo.get_run(session, "r1")
        assert run.status == "running"
        assert run.started_at is not None
        assert run.ended_at is not None

    def test_missing_run(self, session):
        assert repo.get_run(session, "nope") is None

    def test_runs_for_subcommand(self, session):
        repo.upsert_run(session, run_entity("r1"))
        repo.upsert_run(session, run_entity("r2"))
        repo.commit(session)
        assert {r.run_id for r in repo.get_runs_for_subcommand(session, "theta")} == {"r1", "r2"}


class TestArtifactConstraints:
    """UNIQUE(run_id, path)."""

    def test_duplicate_path_rejected(self, session):
        session.add(
            Run(
                run_id="r1",
                subcommand="theta",
                config_hash="c",
                config_json="{}",
                seed=0,
                workers=1,
                status="queued",
            )
        )
        session.add(Artifact(artifact_id="a1", run_id="r1", kind="csv", path="x", sha256="0"))
        session.add(Artifact(artifact_id="a2", run_id="r1", kind="csv", path="x", sha256="0"))
        with pytest.raises(IntegrityError):
            session.commit()

    def test_artifacts_ordered_by_path(self, session):
        repo.upsert_run(session, run_entity())
        repo.create_artifact(session, artifact_entity("a1", "z.csv"))
        repo.create_artifact(session, artifact_entity("a2", "a.csv"))
        repo.commit(session)
        paths = [a.path for a in repo.get_artifacts_for_run(session, "r1")]
        assert paths == ["a.csv", "z.csv"]
