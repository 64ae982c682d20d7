"""HTTP+JSON API over the contest store.

Bearer tokens carry identity: team tokens mutate only their own data, the
admin token drives phase changes and judging.  Evaluation and adjudication
are injected callables, so the API stays testable without a sandbox and
the real pipeline wires in at deployment.
"""

from __future__ import annotations

import base64
import binascii
from typing import Callable, Optional

from fastapi import Depends, FastAPI, Header, HTTPException
from pydantic import BaseModel, Field

from .store import ContestStore, StoreError

Evaluator = Callable[[str, str], dict]  # (archive_ref, submission_id) -> result
Adjudicator = Callable[[dict], dict]  # break payload record -> verdict record


class TeamCreate(BaseModel):
    name: str


class SubmissionIn(BaseModel):
    archive_b64: str


class BreakIn(BaseModel):
    target_team: str
    category_claim: str
    payload: dict


class FixIn(BaseModel):
    covered_report_ids: list[str] = Field(min_length=1)
    diff_ref: str = ""
    bundle_b64: str = ""


class PhaseIn(BaseModel):
    phase: str


class FixDecisionIn(BaseModel):
    fix_id: str
    approved: bool
    rationale: str
    judge: str = "admin"


def create_app(
    store: ContestStore,
    evaluator: Optional[Evaluator] = None,
    adjudicator: Optional[Adjudicator] = None,
) -> FastAPI:
    app = FastAPI(title="contest-service")
    app.state.store = store

    def identity(authorization: str = Header(default="")) -> str:
        token = authorization.removeprefix("Bearer ").strip()
        caller = store.authenticate(token)
        if caller is None:
            raise HTTPException(401, "bad or missing token")
        return caller

    def require_team(caller: str = Depends(identity)) -> str:
        if caller == "admin":
            raise HTTPException(403, "team token required")
        return caller

    def require_admin(caller: str = Depends(identity)) -> str:
        if caller != "admin":
            raise HTTPException(403, "admin token required")
        return caller

    def require_phase(expected: str) -> None:
        if store.phase != expected:
            raise HTTPException(
                409, f"operation allowed only in the {expected} phase"
            )

    @app.post("/teams", status_code=201)
    def create_team(body: TeamCreate, _: str = Depends(require_admin)):
        try:
            return store.create_team(body.name)
        except StoreError as exc:
            raise HTTPException(422, str(exc)) from exc

    @app.post("/submissions", status_code=201)
    def ingest_submission(body: SubmissionIn, team: str = Depends(require_team)):
        require_phase("build")
        try:
            blob = base64.b64decode(body.archive_b64, validate=True)
        except (ValueError, binascii.Error) as exc:
            raise HTTPException(422, "archive_b64 is not base64") from exc
        archive_ref = store.store_archive(blob)
        submission_id = store.record_submission(team, archive_ref)
        evaluation = None
        if evaluator is not None:
            result = evaluator(archive_ref, submission_id)
            store.record_test_result(
                submission_id,
                team,
                qualified=bool(result.get("qualified")),
                correctness=result.get("correctness", []),
                performance=result.get("performance", []),
                language=result.get("language", ""),
            )
            evaluation = {"qualified": bool(result.get("qualified"))}
        return {"submission_id": submission_id, "evaluation": evaluation}

    @app.get("/targets")
    def list_targets(team: str = Depends(require_team)):
        require_phase("break")
        return {"targets": store.targets_for(team)}

    @app.post("/breaks", status_code=201)
    def submit_break(body: BreakIn, team: str = Depends(require_team)):
        require_phase("break")
        if not store.team_exists(body.target_team):
            raise HTTPException(404, "unknown target team")
        qualified_teams = {r["team"] for r in store.qualifying_submissions()}
        if body.target_team not in qualified_teams:
            raise HTTPException(422, "target team has no qualifying submission")
        if body.target_team == team:
            raise HTTPException(422, "cannot break your own submission")
        report_id = store.record_break(
            team, body.target_team, body.category_claim, body.payload
        )
        verdict = None
        if adjudicator is not None:
            record = {
                "report_id": report_id,
                "breaker": team,
                "target": body.target_team,
                "category_claim": body.category_claim,
                "payload": body.payload,
            }
            outcome = adjudicator(record)
            store.record_break_verdict(
                report_id,
                outcome.get("status", "rejected"),
                outcome.get("category"),
                outcome.get("reason", ""),
            )
            verdict = store._verdicts().get(report_id)
        return {"report_id": report_id, "verdict": verdict}

    @app.post("/fixes", status_code=201)
    def submit_fix(body: FixIn, team: str = Depends(require_team)):
        require_phase("fix")
        bundle_ref = ""
        if body.bundle_b64:
            try:
                bundle_ref = store.store_archive(
                    base64.b64decode(body.bundle_b64, validate=True)
                )
            except (ValueError, binascii.Error) as exc:
                raise HTTPException(422, "bundle_b64 is not base64") from exc
        try:
            fix_id = store.record_fix(
                team, body.covered_report_ids, body.diff_ref, bundle_ref
            )
        except StoreError as exc:
            raise HTTPException(422, str(exc)) from exc
        return {"fix_id": fix_id}

    @app.get("/scoreboard")
    def scoreboard(authorization: str = Header(default="")):
        # hide_scores turns the live board admin-only for the duration
        if store.config.hide_scores:
            token = authorization.removeprefix("Bearer ").strip()
            if store.authenticate(token) != "admin":
                raise HTTPException(403, "scores are hidden during this contest")
        return store.scoreboard()

    @app.get("/events")
    def events(since: int = 0, caller: str = Depends(identity)):
        out = []
        for event in store.log.events(since=since):
            payload = dict(event.payload)
            if event.kind in ("break", "fix"):
                owner = payload.get("breaker") or payload.get("team")
                if caller != "admin" and caller != owner:
                    payload.pop("payload", None)
                    payload.pop("diff_ref", None)
            out.append(
                {
                    "seq": event.seq,
                    "timestamp": event.timestamp,
                    "kind": event.kind,
                    "payload": payload,
                }
            )
        return {"events": out, "last_seq": store.log.last_seq}

    @app.post("/admin/phase")
    def set_phase(body: PhaseIn, _: str = Depends(require_admin)):
        try:
            record = store.set_phase(body.phase)
        except StoreError as exc:
            raise HTTPException(422, str(exc)) from exc
        return {"phase": body.phase, "seq": record.seq}

    @app.post("/admin/fix-decision")
    def fix_decision(body: FixDecisionIn, _: str = Depends(require_admin)):
        fixes = store._fixes()
        fix = fixes.get(body.fix_id)
        if fix is None:
            raise HTTPException(404, "unknown fix")
        if fix.get("precheck_ok") is False:
            raise HTTPException(409, "fix failed prechecks; nothing to decide")
        if not body.approved and not body.rationale:
            raise HTTPException(422, "a rejection requires a rationale")
        try:
            record = store.record_fix_decision(
                body.fix_id, body.approved, body.judge, body.rationale
            )
        except StoreError as exc:
            raise HTTPException(409, str(exc)) from exc
        return {"fix_id": body.fix_id, "approved": body.approved, "seq": record.seq}

    @app.post("/admin/break-verdict")
    def break_verdict(body: dict, _: str = Depends(require_admin)):
        try:
            record = store.record_break_verdict(
                str(body.get("report_id")),
                str(body.get("status")),
                body.get("category"),
                str(body.get("reason", "")),
            )
        except StoreError as exc:
            raise HTTPException(404, str(exc)) from exc
        return {"seq": record.seq}

    return app
