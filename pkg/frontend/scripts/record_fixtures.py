#!/usr/bin/env python3
"""Record API fixtures for the frontend contract tests.

Drives a small scripted contest through the HTTP API (stub evaluation and
adjudication keep it fast) and snapshots the responses the UI consumes.
Run from the repository root:

    python3 frontend/scripts/record_fixtures.py
"""

import base64
import json
from pathlib import Path

from fastapi.testclient import TestClient

from bibifi.service.api import create_app
from bibifi.service.store import ContestConfig, ContestStore

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def evaluator(archive_ref, submission_id):
    return {
        "qualified": True,
        "correctness": [
            {"test_id": "m-state-query", "kind": "mandatory", "passed": True},
            {"test_id": "o-total-time", "kind": "optional", "passed": True},
        ],
        "performance": [{"test_id": "p-append-burst", "measure": "2"}],
        "language": "python",
    }


def adjudicator(record):
    return {"status": "accepted", "category": "privacy", "reason": "fixture"}


def snap(name, payload):
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / f"{name}.json").write_text(json.dumps(payload, indent=1, sort_keys=True))
    print(f"recorded {name}.json")


def main():
    store = ContestStore(None, ContestConfig(problem="securelog", seed=7))
    app = create_app(store, evaluator=evaluator, adjudicator=adjudicator)
    client = TestClient(app)
    admin = {"Authorization": f"Bearer {store.admin_token}"}

    snap("scoreboard_empty", client.get("/scoreboard").json())

    teams = {}
    for name in ("alpha", "bravo", "charlie"):
        teams[name] = client.post("/teams", json={"name": name}, headers=admin).json()

    def as_team(name):
        return {"Authorization": f"Bearer {teams[name]['api_token']}"}

    archive = base64.b64encode(b"fixture bundle bytes").decode()
    for name in teams:
        client.post(
            "/submissions", json={"archive_b64": archive}, headers=as_team(name)
        )

    client.post("/admin/phase", json={"phase": "break"}, headers=admin)
    snap("targets_alpha", client.get("/targets", headers=as_team("alpha")).json())
    snap("targets_bravo", client.get("/targets", headers=as_team("bravo")).json())

    report_ids = []
    for breaker in ("bravo", "charlie"):
        response = client.post(
            "/breaks",
            json={
                "target_team": teams["alpha"]["team_id"],
                "category_claim": "privacy",
                "payload": {"query": ["-S"], "claimed_output": "Fred"},
            },
            headers=as_team(breaker),
        )
        report_ids.append(response.json()["report_id"])

    snap("scoreboard_prefix", client.get("/scoreboard").json())

    client.post("/admin/phase", json={"phase": "fix"}, headers=admin)
    fix_id = client.post(
        "/fixes",
        json={"covered_report_ids": report_ids, "diff_ref": "seal whole file"},
        headers=as_team("alpha"),
    ).json()["fix_id"]
    store.record_fix_precheck(fix_id, True, "build ok\nmandatory ok\npayloads defended")

    # a second fix that failed prechecks (shown auto-rejected in the queue)
    second_break = client.post(
        "/breaks",
        json={
            "target_team": teams["bravo"]["team_id"],
            "category_claim": "privacy",
            "payload": {},
        },
        headers=as_team("charlie"),
    )
    # breaks are gated to the break phase; flip back, record, return to fix
    client.post("/admin/phase", json={"phase": "break"}, headers=admin)
    second_break = client.post(
        "/breaks",
        json={
            "target_team": teams["bravo"]["team_id"],
            "category_claim": "privacy",
            "payload": {},
        },
        headers=as_team("charlie"),
    ).json()
    client.post("/admin/phase", json={"phase": "fix"}, headers=admin)
    failing_fix = client.post(
        "/fixes",
        json={
            "covered_report_ids": [second_break["report_id"]],
            "diff_ref": "does not help",
        },
        headers=as_team("bravo"),
    ).json()["fix_id"]
    store.record_fix_precheck(failing_fix, False, "report still reproduces")

    snap("events_admin", client.get("/events", headers=admin).json())
    snap(
        "events_team_view",
        client.get("/events", headers=as_team("alpha")).json(),
    )

    client.post(
        "/admin/fix-decision",
        json={"fix_id": fix_id, "approved": True, "rationale": "one flaw"},
        headers=admin,
    )
    snap("scoreboard_after_fix", client.get("/scoreboard").json())
    snap("events_after_fix", client.get("/events", headers=admin).json())
    snap(
        "meta",
        {
            "teams": {k: v["team_id"] for k, v in teams.items()},
            "report_ids": report_ids,
            "fix_id": fix_id,
            "failing_fix_id": failing_fix,
        },
    )


if __name__ == "__main__":
    main()
