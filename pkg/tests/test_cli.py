"""bibifi-admin: init/phase plumbing and the report rendering path."""

import csv
import json
from pathlib import Path

import pytest

from bibifi.cli import main
from bibifi.report import write_report
from bibifi.service.store import ContestConfig, ContestStore


@pytest.fixture()
def seeded_store(tmp_path):
    """A store with two teams, one qualified build, one accepted break."""
    store = ContestStore(tmp_path / "store", ContestConfig(problem="securelog"))
    alpha = store.create_team("alpha")["team_id"]
    bravo = store.create_team("bravo")["team_id"]
    sub = store.record_submission(alpha, "ref1")
    store.record_test_result(
        sub, alpha, True,
        [{"test_id": "m-1", "kind": "mandatory", "passed": True}],
        [{"test_id": "p-1", "measure": "2"}],
    )
    report = store.record_break(bravo, alpha, "privacy", {})
    store.record_break_verdict(report, "accepted", "privacy", "confirmed")
    return store


class TestReportPath:
    def test_writes_csv_and_figures(self, seeded_store, tmp_path):
        out = tmp_path / "report"
        paths = write_report(seeded_store, out)
        names = {p.name for p in paths}
        assert names == {
            "scoreboard.csv", "breaks.csv", "standings.png", "break_categories.png",
        }
        for path in paths:
            assert path.exists() and path.stat().st_size > 0
        # figures are real PNGs
        assert (out / "standings.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_scoreboard_csv_matches_fold(self, seeded_store, tmp_path):
        paths = write_report(seeded_store, tmp_path / "report")
        with (tmp_path / "report" / "scoreboard.csv").open() as handle:
            rows = {row["team"]: row for row in csv.DictReader(handle)}
        board = {r["team"]: r for r in seeded_store.scoreboard()["rows"]}
        assert rows.keys() == board.keys()
        for team, row in rows.items():
            assert row["ship"] == board[team]["ship"]
            assert row["resilience"] == board[team]["resilience"]
            assert row["break_score"] == board[team]["break_score"]

    def test_breaks_csv_lists_verdicts(self, seeded_store, tmp_path):
        write_report(seeded_store, tmp_path / "report")
        with (tmp_path / "report" / "breaks.csv").open() as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 1
        assert rows[0]["status"] == "accepted"
        assert rows[0]["category"] == "privacy"

    def test_empty_store_report(self, tmp_path):
        store = ContestStore(tmp_path / "empty-store", ContestConfig())
        paths = write_report(store, tmp_path / "report")
        assert all(p.exists() for p in paths)


class TestCliCommands:
    def test_init_then_phase_and_report(self, tmp_path, capsys):
        store_dir = str(tmp_path / "store")
        assert main(["init", "--store", store_dir, "--problem", "ehr"]) == 0
        out = capsys.readouterr().out
        assert "admin token:" in out and "problem: ehr" in out

        assert main(["phase", "--store", store_dir, "--phase", "break"]) == 0
        store = ContestStore(tmp_path / "store")
        assert store.phase == "break"
        assert store.config.problem == "ehr"

        report_dir = str(tmp_path / "report")
        assert main(["report", "--store", store_dir, "--out", report_dir]) == 0
        assert (tmp_path / "report" / "scoreboard.csv").exists()

    def test_missing_store_errors(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["phase", "--store", str(tmp_path / "nowhere"), "--phase", "break"])

    def test_evaluate_failing_bundle(self, tmp_path, capsys):
        bundle = tmp_path / "bundle"
        bundle.mkdir()
        (bundle / "build").write_text("#!/bin/sh\nexit 1\n")
        (bundle / "build").chmod(0o755)
        code = main(["evaluate", "--bundle", str(bundle), "--problem", "securelog"])
        assert code == 1
        doc = json.loads(capsys.readouterr().out)
        assert doc["qualified"] is False
