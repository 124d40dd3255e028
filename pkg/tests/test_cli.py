"""Tests for configuration parsing and end-to-end CLI runs."""

import json

import pytest

from stickyflows.cli.config import DEFAULT_OUT, OUT_ENV, parse_config, read_config_file
from stickyflows.cli.main import main
from stickyflows.db import repo
from stickyflows.db.session import get_db_session, ledger_path
from stickyflows.errors import ConfigError
from stickyflows.export.tables import read_csv


def run_dirs(out):
    return sorted((out / "runs").iterdir())


class TestParseConfig:
    """Precedence: model defaults < config file < flags."""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv(OUT_ENV, raising=False)
        config = parse_config(["theta"])
        assert config.params.nmax == 5
        assert config.seed == 0
        assert config.out == DEFAULT_OUT

    def test_file_then_flags(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# theta run\nnmax = 6\nb = 2.0\nseed = 11\n")
        config = parse_config(["theta", "--config", str(cfg), "--nmax", "7"])
        assert config.params.nmax == 7
        assert config.params.b == 2.0
        assert config.seed == 11

    def test_global_options_before_subcommand(self):
        config = parse_config(["--seed", "3", "--workers", "2", "cells", "--n", "4"])
        assert (config.seed, config.workers, config.params.n) == (3, 2, 4)

    def test_out_from_environment(self, monkeypatch):
        monkeypatch.setenv(OUT_ENV, "/tmp/elsewhere")
        assert parse_config(["cells"]).out == "/tmp/elsewhere"
        assert parse_config(["cells", "--out", "here"]).out == "here"

    def test_list_values(self):
        config = parse_config(["radial", "--n_points", "2,5"])
        assert config.params.n_points == [2, 5]

    def test_bool_flag(self):
        assert parse_config(["theta", "--fold"]).params.fold is True

    def test_bound_message(self):
        with pytest.raises(ConfigError, match="n must be ≥ 1"):
            parse_config(["cells", "--n", "0"])

    def test_unknown_key_in_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus = 1\n")
        with pytest.raises(ConfigError, match="unknown key: bogus"):
            parse_config(["theta", "--config", str(cfg)])

    def test_duplicate_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nmax = 3\nnmax = 4\n")
        with pytest.raises(ConfigError):
            read_config_file(cfg)

    def test_malformed_line(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nmax 3\n")
        with pytest.raises(ConfigError):
            read_config_file(cfg)


class TestMain:
    """Exit statuses, artifacts and the ledger."""

    def test_theta_run(self, tmp_path):
        assert main(["theta", "--out", str(tmp_path)]) == 0
        (run,) = run_dirs(tmp_path)
        schema, header, rows = read_csv(run / "theta.csv")
        assert schema == "theta/v1"
        assert header == ["k", "l", "theta", "method", "error_bound"]
        assert len(rows) == 10
        summary = json.loads((run / "summary.json").read_text())
        assert summary["status_badge"] == "pass"
        assert summary["results"]["rows"] == 10

    def test_fold_keeps_upper_triangle(self, tmp_path):
        assert main(["theta", "--fold", "--out", str(tmp_path)]) == 0
        (run,) = run_dirs(tmp_path)
        _, _, rows = read_csv(run / "theta.csv")
        assert all(int(k) <= int(l) for k, l, *_ in rows)  # noqa: E741
        assert len(rows) == 6

    def test_rerun_is_byte_identical(self, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        for out in (first, second):
            assert main(["cells", "--n", "4", "--seed", "5", "--out", str(out)]) == 0
        (a,) = run_dirs(first)
        (b,) = run_dirs(second)
        assert a.name == b.name
        for name in ("cells.csv", "summary.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_ledger_records_run(self, tmp_path):
        assert main(["cells", "--out", str(tmp_path)]) == 0
        (run,) = run_dirs(tmp_path)
        with get_db_session(ledger_path(tmp_path)) as session:
            entity = repo.get_run(session, run.name)
            artifacts = repo.get_artifacts_for_run(session, run.name)
        assert entity.status == "succeeded"
        assert entity.status_badge == "pass"
        assert {a.kind for a in artifacts} == {"csv", "json"}

    def test_config_error_exit_status(self, tmp_path, capsys):
        assert main(["cells", "--n", "0", "--out", str(tmp_path)]) == 2
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["error_code"] == "ConfigError"
        assert record["error_detail"] == "n must be ≥ 1"
        assert record["key"] == "n"

    def test_usage_error_exit_status(self):
        assert main(["no-such-subcommand"]) == 2

    def test_config_error_inside_run(self, tmp_path):
        argv = ["marttest", "--f", "table", "--out", str(tmp_path)]
        assert main(argv) == 2
        (run,) = run_dirs(tmp_path)
        error = json.loads((run / "error.json").read_text())
        assert error["error_code"] == "ConfigError"

    def test_module_error_exit_status(self, tmp_path):
        argv = ["kernel", "--cells", "16", "--dt", "10", "--t", "1", "--out", str(tmp_path)]
        assert main(argv) == 1
        (run,) = run_dirs(tmp_path)
        error = json.loads((run / "error.json").read_text())
        assert error["error_code"] == "CFLViolation"
        with get_db_session(ledger_path(tmp_path)) as session:
            assert repo.get_run(session, run.name).status == "failed"

    def test_exits_schedule_reports_plateau(self, tmp_path):
        argv = ["exits", "--n_points", "2", "--n", "5", "--replicas", "200"]
        argv += ["--schedule_n", "5,10", "--heuristic_samples", "100", "--out", str(tmp_path)]
        assert main(argv) == 0
        (run,) = run_dirs(tmp_path)
        results = json.loads((run / "summary.json").read_text())["results"]
        assert [entry["n"] for entry in results["schedule"]] == [5, 10]
        assert results["plateau"]["1:1"]["used"] >= 1
        assert "1:1" in results["heuristic_theta"]
        schema, header, rows = read_csv(run / "exits_schedule.csv")
        assert schema == "exit_schedule/v1"
        assert header[:4] == ["n", "epsilon", "k", "l"]
        assert len(rows) == 2

    def test_exits_schedule_lengths_must_match(self, tmp_path):
        argv = ["exits", "--n_points", "2", "--n", "5", "--replicas", "20"]
        argv += ["--schedule_n", "5,10", "--schedule_epsilon", "0.1", "--out", str(tmp_path)]
        assert main(argv) == 2
