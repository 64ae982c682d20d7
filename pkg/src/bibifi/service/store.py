"""Contest store: teams, archives, the event log, and the scoreboard fold.

The scoreboard is a pure function of the event log (plus the scoring
rules), so `scoreboard()` and a replay from disk agree byte for byte.
Team identities and API tokens are infrastructure, not scoring state; they
live beside the log, never inside it.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import secrets
import uuid
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..scoring import (
    BugReport,
    CorrectnessOutcome,
    FixCoverage,
    PerformanceOutcome,
    ScoringParams,
    compute_break_scores,
    compute_resilience,
    compute_ship_score,
    enforce_submission_limits,
    render_points,
    unify_defects,
)
from .events import EventLog, EventRecord

PHASES = ("build", "break", "fix", "closed")


class StoreError(ValueError):
    pass


@dataclass(frozen=True)
class ContestConfig:
    problem: str = "securelog"
    multiplier: int = 50
    seed: int = 20160901
    hide_scores: bool = False
    # informational schedule; phase changes are explicit admin events
    schedule: dict = field(default_factory=dict)

    @property
    def params(self) -> ScoringParams:
        return ScoringParams(multiplier=self.multiplier, problem=self.problem)


class ContestStore:
    def __init__(self, root: Path | None = None, config: ContestConfig | None = None):
        self.root = root
        self.config = config or ContestConfig()
        if root is not None:
            root.mkdir(parents=True, exist_ok=True)
            (root / "blobs").mkdir(exist_ok=True)
            self.log = EventLog(root / "events.jsonl")
            self._teams_path = root / "teams.json"
            self._teams = (
                json.loads(self._teams_path.read_text())
                if self._teams_path.exists()
                else {}
            )
            config_path = root / "config.json"
            if config is not None or not config_path.exists():
                config_path.write_text(json.dumps(self.config.__dict__, indent=1))
            else:
                self.config = ContestConfig(**json.loads(config_path.read_text()))
        else:
            self.log = EventLog()
            self._teams_path = None
            self._teams = {}
        if "_admin" not in self._teams:
            self._teams["_admin"] = {"name": "_admin", "token": secrets.token_hex(16)}
            self._save_teams()

    # -- teams and auth ----------------------------------------------------

    def _save_teams(self) -> None:
        if self._teams_path is not None:
            self._teams_path.write_text(json.dumps(self._teams, indent=1))

    @property
    def admin_token(self) -> str:
        return self._teams["_admin"]["token"]

    def create_team(self, name: str) -> dict:
        if not name or not name.replace("-", "").replace("_", "").isalnum():
            raise StoreError("team names are alphanumeric plus -_")
        team_id = f"team-{len([t for t in self._teams if t != '_admin']) + 1:03d}"
        token = secrets.token_hex(16)  # 128-bit bearer token
        self._teams[team_id] = {"name": name, "token": token}
        self._save_teams()
        return {"team_id": team_id, "api_token": token}

    def authenticate(self, token: str | None) -> str | None:
        if not token:
            return None
        for team_id, entry in self._teams.items():
            if hmac.compare_digest(entry["token"], token):
                return "admin" if team_id == "_admin" else team_id
        return None

    def team_exists(self, team_id: str) -> bool:
        return team_id in self._teams and team_id != "_admin"

    # -- recording ----------------------------------------------------------

    @property
    def phase(self) -> str:
        current = "build"
        for event in self.log.events():
            if event.kind == "phase-change":
                current = event.payload["phase"]
        return current

    def set_phase(self, phase: str) -> EventRecord:
        if phase not in PHASES:
            raise StoreError(f"unknown phase {phase!r}")
        return self.log.append("phase-change", {"phase": phase})

    def store_archive(self, blob: bytes) -> str:
        digest = hashlib.sha256(blob).hexdigest()
        if self.root is not None:
            (self.root / "blobs" / digest).write_bytes(blob)
        return digest

    def record_submission(self, team_id: str, archive_ref: str) -> str:
        submission_id = f"sub-{uuid.uuid4().hex[:10]}"
        self.log.append(
            "submission",
            {
                "submission_id": submission_id,
                "team": team_id,
                "problem": self.config.problem,
                "archive_ref": archive_ref,
            },
        )
        return submission_id

    def record_test_result(
        self,
        submission_id: str,
        team_id: str,
        qualified: bool,
        correctness: list[dict],
        performance: list[dict],
        language: str = "",
    ) -> EventRecord:
        return self.log.append(
            "test-result",
            {
                "submission_id": submission_id,
                "team": team_id,
                "qualified": qualified,
                "correctness": correctness,
                "performance": performance,
                "language": language,
            },
        )

    def record_break(
        self, breaker: str, target_team: str, category_claim: str, payload: dict
    ) -> str:
        report_id = f"rep-{uuid.uuid4().hex[:10]}"
        self.log.append(
            "break",
            {
                "report_id": report_id,
                "breaker": breaker,
                "target": target_team,
                "category_claim": category_claim,
                "payload": payload,
            },
        )
        return report_id

    def record_break_verdict(
        self, report_id: str, status: str, category: str | None, reason: str
    ) -> EventRecord:
        breaks = self._breaks()
        if report_id not in breaks:
            raise StoreError(f"unknown report {report_id!r}")
        if status == "accepted":
            info = breaks[report_id]
            prior = [
                r
                for r in self._accepted_reports()
                if r.breaker_team == info["breaker"]
                and r.target_team == info["target"]
            ]
            candidate = BugReport(
                report_id, info["breaker"], info["target"],
                category or info["category_claim"], accepted=True,
            )
            decision = enforce_submission_limits(
                self.config.problem, prior, candidate
            )
            if not decision.allowed:
                status, reason = "rejected", f"limit: {decision.reason}"
        return self.log.append(
            "judge-decision",
            {
                "report_id": report_id,
                "status": status,
                "category": category,
                "reason": reason,
            },
        )

    def record_fix(
        self, team_id: str, covered_report_ids: list[str], diff_ref: str = "",
        bundle_ref: str = "",
    ) -> str:
        accepted = {r.report_id: r for r in self._accepted_reports()}
        for report_id in covered_report_ids:
            report = accepted.get(report_id)
            if report is None:
                raise StoreError(f"report {report_id!r} is not an accepted report")
            if report.target_team != team_id:
                raise StoreError("fixes may only cover reports against your team")
        fix_id = f"fix-{uuid.uuid4().hex[:10]}"
        self.log.append(
            "fix",
            {
                "fix_id": fix_id,
                "team": team_id,
                "covered_report_ids": sorted(covered_report_ids),
                "diff_ref": diff_ref,
                "bundle_ref": bundle_ref,
            },
        )
        return fix_id

    def record_fix_precheck(self, fix_id: str, ok: bool, log: str) -> EventRecord:
        return self.log.append(
            "judge-decision",
            {"fix_id": fix_id, "precheck": True, "ok": ok, "log": log},
        )

    def record_fix_decision(
        self, fix_id: str, approved: bool, judge: str, rationale: str
    ) -> EventRecord:
        fixes = self._fixes()
        if fix_id not in fixes:
            raise StoreError(f"unknown fix {fix_id!r}")
        if not judge:
            raise StoreError("a judge identity is required")
        if approved:
            covered = set(fixes[fix_id]["covered_report_ids"])
            for other_id, other in fixes.items():
                if other_id != fix_id and other.get("approved"):
                    overlap = covered & set(other["covered_report_ids"])
                    if overlap:
                        raise StoreError(
                            f"reports {sorted(overlap)} already covered by "
                            f"approved fix {other_id!r}"
                        )
        return self.log.append(
            "judge-decision",
            {
                "fix_id": fix_id,
                "approved": approved,
                "judge": judge,
                "rationale": rationale,
            },
        )

    # -- folds ---------------------------------------------------------------

    def _breaks(self) -> dict[str, dict]:
        return {
            e.payload["report_id"]: e.payload
            for e in self.log.events()
            if e.kind == "break"
        }

    def _verdicts(self) -> dict[str, dict]:
        verdicts = {}
        for event in self.log.events():
            if event.kind == "judge-decision" and "report_id" in event.payload:
                verdicts[event.payload["report_id"]] = event.payload
        return verdicts

    def _accepted_reports(self) -> list[BugReport]:
        breaks = self._breaks()
        reports = []
        for report_id, verdict in self._verdicts().items():
            if verdict.get("status") != "accepted":
                continue
            info = breaks[report_id]
            reports.append(
                BugReport(
                    report_id=report_id,
                    breaker_team=info["breaker"],
                    target_team=info["target"],
                    category=verdict.get("category") or info["category_claim"],
                    accepted=True,
                )
            )
        return sorted(reports, key=lambda r: r.report_id)

    def _fixes(self) -> dict[str, dict]:
        fixes: dict[str, dict] = {}
        for event in self.log.events():
            if event.kind == "fix":
                fixes[event.payload["fix_id"]] = dict(event.payload)
            elif event.kind == "judge-decision" and "fix_id" in event.payload:
                payload = event.payload
                fix = fixes.get(payload["fix_id"])
                if fix is None:
                    continue
                if payload.get("precheck"):
                    fix["precheck_ok"] = payload["ok"]
                    fix["precheck_log"] = payload.get("log", "")
                else:
                    fix["approved"] = payload["approved"]
                    fix["judge"] = payload.get("judge", "")
                    fix["rationale"] = payload.get("rationale", "")
        return fixes

    def _latest_results(self) -> dict[str, dict]:
        """team -> latest test-result payload (resubmission supersedes)."""
        latest: dict[str, dict] = {}
        for event in self.log.events():
            if event.kind == "test-result":
                latest[event.payload["team"]] = event.payload
        return latest

    def qualifying_submissions(self) -> list[dict]:
        return sorted(
            (r for r in self._latest_results().values() if r.get("qualified")),
            key=lambda r: r["submission_id"],
        )

    def targets_for(self, team_id: str) -> list[dict]:
        """Deterministic per-team permutation of the qualifying submissions."""
        from ..scoring import SUBMISSION_LIMITS

        key = f"{self.config.seed}:{team_id}".encode()

        def rank(entry: dict) -> str:
            return hmac.new(
                key, entry["submission_id"].encode(), hashlib.sha256
            ).hexdigest()

        targets = sorted(self.qualifying_submissions(), key=rank)
        total = SUBMISSION_LIMITS[self.config.problem]["total"]
        used: dict[str, int] = {}
        for report in self._accepted_reports():
            if report.breaker_team == team_id:
                used[report.target_team] = used.get(report.target_team, 0) + 1
        return [
            {
                "submission_id": entry["submission_id"],
                "team": entry["team"],
                "language": entry.get("language", ""),
                "remaining_reports": max(0, total - used.get(entry["team"], 0)),
            }
            for entry in targets
            if entry["team"] != team_id
        ]

    def scoreboard(self) -> dict:
        params = self.config.params
        results = self._latest_results()
        reports = self._accepted_reports()
        fixes = [
            FixCoverage(
                fix_id=fix_id,
                target_team=fix["team"],
                covered_report_ids=frozenset(fix["covered_report_ids"]),
            )
            for fix_id, fix in sorted(self._fixes().items())
            if fix.get("approved")
        ]
        groups = unify_defects(reports, fixes, params)

        # contest-wide best/worst per performance test over qualifying runs
        perf_span: dict[str, list[Fraction]] = {}
        for result in results.values():
            if not result.get("qualified"):
                continue
            for perf in result.get("performance", []):
                perf_span.setdefault(perf["test_id"], []).append(
                    Fraction(perf["measure"])
                )

        teams = sorted(
            set(results) | {r.breaker_team for r in reports} | {
                r.target_team for r in reports
            }
        )
        break_scores = compute_break_scores(groups, reports) if groups else {}
        rows = []
        for team in teams:
            ship = Fraction(0)
            qualified = False
            result = results.get(team)
            if result is not None and result.get("qualified"):
                qualified = True
                correctness = [
                    CorrectnessOutcome(c["test_id"], c["kind"], c["passed"])
                    for c in result.get("correctness", [])
                ]
                perf = []
                for entry in result.get("performance", []):
                    span = perf_span[entry["test_id"]]
                    perf.append(
                        (
                            PerformanceOutcome(
                                entry["test_id"], Fraction(entry["measure"])
                            ),
                            min(span),
                            max(span),
                        )
                    )
                ship = compute_ship_score(correctness, perf, params)
            my_groups = [g for g in groups if g.target_team == team]
            resilience = compute_resilience(my_groups) if my_groups else Fraction(0)
            rows.append(
                {
                    "team": team,
                    "qualified": qualified,
                    "ship": render_points(ship),
                    "resilience": render_points(resilience),
                    "break_score": render_points(
                        break_scores.get(team, Fraction(0))
                    ),
                    "total": render_points(
                        ship + resilience + break_scores.get(team, Fraction(0))
                    ),
                    "defects": sorted(
                        json.dumps(
                            {
                                "group_id": g.group_id,
                                "severity": g.severity,
                                "penalty": render_points(g.penalty),
                                "reports": sorted(g.report_ids),
                            },
                            sort_keys=True,
                        )
                        for g in my_groups
                    ),
                }
            )
        return {"rows": rows, "last_seq": self.log.last_seq, "phase": self.phase}

    def scoreboard_json(self) -> str:
        return json.dumps(self.scoreboard(), sort_keys=True, separators=(",", ":"))
