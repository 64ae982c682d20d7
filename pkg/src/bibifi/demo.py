"""The scripted mini-contest: three teams, two breaks, one approved fix.

Everything runs through the real surfaces: submissions are tarballs pushed
over the HTTP API and evaluated in the sandbox, breaks are adjudicated
against the built targets, and the fix goes through mechanical prechecks
before the judge's ruling re-groups the two reports into one defect.  The
returned summary includes the pre-fix and post-fix scoreboards and whether
an event-log replay reproduces the final board byte for byte.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

from fastapi.testclient import TestClient

from .fixtures import bundles
from .fixtures.breaks import SECURELOG_CRASH_COMMANDS
from .service.api import create_app
from .service.store import ContestConfig, ContestStore
from .service.wiring import Pipeline, pack_bundle


def run_demo(store_root: Path, workdir: Path, verbose: bool = False) -> dict:
    def say(message: str) -> None:
        if verbose:
            print(message)

    store = ContestStore(store_root, ContestConfig(problem="securelog"))
    pipeline = Pipeline(store, workdir, quick=True)
    app = create_app(store, evaluator=pipeline.evaluator, adjudicator=pipeline.adjudicator)
    client = TestClient(app)
    admin = {"Authorization": f"Bearer {store.admin_token}"}

    def as_team(team: dict) -> dict:
        return {"Authorization": f"Bearer {team['api_token']}"}

    say("registering teams alpha, bravo, charlie")
    teams = {
        name: client.post("/teams", json={"name": name}, headers=admin).json()
        for name in ("alpha", "bravo", "charlie")
    }

    say("build phase: packing and submitting bundles")
    staging = workdir / "staging"
    staging.mkdir(parents=True, exist_ok=True)
    sources = {
        "alpha": bundles.write_oracle_bundle("securelog", staging / "alpha"),
        "bravo": bundles.write_fixture_bundle("securelog-crashy", staging / "bravo"),
        "charlie": bundles.write_oracle_bundle("securelog", staging / "charlie"),
    }
    for name, source in sources.items():
        archive = pack_bundle(source, staging / f"{name}.tar.gz")
        response = client.post(
            "/submissions",
            json={"archive_b64": base64.b64encode(archive.read_bytes()).decode()},
            headers=as_team(teams[name]),
        )
        response.raise_for_status()
        say(f"  {name}: {response.json()['evaluation']}")

    say("break phase: alpha and charlie both hit bravo's crash")
    client.post("/admin/phase", json={"phase": "break"}, headers=admin)
    report_ids = []
    for breaker in ("alpha", "charlie"):
        response = client.post(
            "/breaks",
            json={
                "target_team": teams["bravo"]["team_id"],
                "category_claim": "crash",
                "payload": {"commands": SECURELOG_CRASH_COMMANDS},
            },
            headers=as_team(teams[breaker]),
        )
        response.raise_for_status()
        body = response.json()
        say(f"  {breaker}: {body['verdict']['status']}")
        report_ids.append(body["report_id"])

    pre_fix = store.scoreboard()

    say("fix phase: bravo ships a fix covering both reports")
    client.post("/admin/phase", json={"phase": "fix"}, headers=admin)
    fix_bundle = bundles.write_oracle_bundle("securelog", staging / "bravo-fixed")
    fix_archive = pack_bundle(fix_bundle, staging / "bravo-fixed.tar.gz")
    response = client.post(
        "/fixes",
        json={
            "covered_report_ids": report_ids,
            "bundle_b64": base64.b64encode(fix_archive.read_bytes()).decode(),
            "diff_ref": "fix the empty-state abort",
        },
        headers=as_team(teams["bravo"]),
    )
    response.raise_for_status()
    fix_id = response.json()["fix_id"]
    ruling = pipeline.precheck_and_decide_fix(
        fix_id, approved=True, judge="organizer-1", rationale="one conceptual flaw"
    )
    say(f"  fix {fix_id}: approved={ruling['approved']}")

    post_fix = store.scoreboard()
    replayed = ContestStore(store.root, store.config)
    replay_matches = replayed.scoreboard_json() == store.scoreboard_json()
    say(f"replay reproduces scoreboard: {replay_matches}")

    return {
        "teams": {name: team["team_id"] for name, team in teams.items()},
        "report_ids": report_ids,
        "fix_id": fix_id,
        "fix_approved": ruling["approved"],
        "pre_fix": pre_fix,
        "scoreboard": post_fix,
        "replay_matches": replay_matches,
    }
