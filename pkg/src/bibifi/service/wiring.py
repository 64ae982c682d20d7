"""Glue between the service and the real build/test/judge pipeline.

The API takes evaluation and adjudication as callables; these factories
produce ones backed by the sandbox runner and the problem judges.  Targets
are built lazily and cached per archive digest; securelog challenge logs
are generated per target team on first use, seeded from the contest seed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import tarfile
from pathlib import Path

from ..fixtures.bundles import build_bundle
from ..judge.adjudicate import BreakSubmission, JudgeContext, adjudicate
from ..runner.evaluate import evaluate_submission
from ..runner.isolation import LocalSandboxProvider
from ..runner.problems import ProblemDescriptor, problem_descriptor
from ..securelog.challenges import generate_challenge_logs
from ..targets import Target
from .store import ContestStore


def pack_bundle(bundle_dir: Path, dest: Path) -> Path:
    """Bundle directory -> submission archive (tar.gz)."""
    with tarfile.open(dest, "w:gz") as tar:
        for item in sorted(bundle_dir.rglob("*")):
            tar.add(item, arcname=item.relative_to(bundle_dir))
    return dest


def unpack_archive(blob: Path, dest: Path) -> Path:
    dest.mkdir(parents=True, exist_ok=True)
    with tarfile.open(blob, "r:*") as tar:
        for member in tar.getmembers():
            target = dest / member.name
            if not str(target.resolve()).startswith(str(dest.resolve())):
                raise ValueError("archive escapes its directory")
        tar.extractall(dest)
    return dest


def quick_descriptor(problem: ProblemDescriptor) -> ProblemDescriptor:
    """Same tests, single performance repetition (demo-scale evaluation)."""
    return dataclasses.replace(
        problem,
        performance_tests=tuple(
            dataclasses.replace(t, repetitions=1) for t in problem.performance_tests
        ),
    )


class Pipeline:
    """Owns the working directory, provider, oracles, and caches."""

    def __init__(self, store: ContestStore, workdir: Path, quick: bool = False):
        from ..fixtures.bundles import built_oracle

        self.store = store
        self.workdir = workdir
        workdir.mkdir(parents=True, exist_ok=True)
        self.provider = LocalSandboxProvider(workdir / "sandboxes")
        self.problem = problem_descriptor(store.config.problem)
        if quick:
            self.problem = quick_descriptor(self.problem)
        self.ctx = JudgeContext(
            oracles={
                pid: built_oracle(pid, workdir / f"oracle-{pid}")
                for pid in ("securelog", "atm", "ehr")
            }
        )
        self._built: dict[str, Target] = {}

    # -- evaluation --------------------------------------------------------

    def evaluator(self, archive_ref: str, submission_id: str) -> dict:
        bundle = self._unpacked(archive_ref)
        evidence = evaluate_submission(bundle, self.problem, self.provider)
        return {
            "qualified": evidence.qualified,
            "correctness": [
                {"test_id": o.test_id, "kind": o.kind, "passed": o.passed}
                for o in evidence.correctness
            ],
            "performance": [
                {"test_id": o.test_id, "measure": str(o.measure), "unit": o.unit}
                for o in evidence.performance
            ],
            "language": "",
        }

    def _unpacked(self, archive_ref: str) -> Path:
        assert self.store.root is not None
        blob = self.store.root / "blobs" / archive_ref
        dest = self.workdir / "bundles" / archive_ref
        if not dest.exists():
            unpack_archive(blob, dest)
        return dest

    def _target_for(self, team_id: str) -> Target | None:
        latest = self.store._latest_results().get(team_id)
        if latest is None or not latest.get("qualified"):
            return None
        submissions = {
            e.payload["submission_id"]: e.payload
            for e in self.store.log.events()
            if e.kind == "submission"
        }
        submission = submissions.get(latest["submission_id"])
        if submission is None:
            return None
        ref = submission["archive_ref"]
        if ref not in self._built:
            self._built[ref] = build_bundle(self._unpacked(ref))
        return self._built[ref]

    def _challenges_for(self, team_id: str):
        if team_id not in self.ctx.challenges:
            target = self._target_for(team_id)
            if target is None:
                return []
            digest = hashlib.sha256(team_id.encode()).digest()
            seed = self.store.config.seed ^ int.from_bytes(digest[:4], "big")
            self.ctx.challenges[team_id] = generate_challenge_logs(target, seed)
        return self.ctx.challenges[team_id]

    # -- adjudication --------------------------------------------------------

    def adjudicator(self, record: dict) -> dict:
        target = self._target_for(record["target"])
        if target is None:
            return {"status": "rejected", "reason": "target has no qualified build"}
        if self.store.config.problem == "securelog" and record[
            "category_claim"
        ] in ("privacy", "integrity"):
            self._challenges_for(record["target"])
        submission = BreakSubmission(
            breaker_team=record["breaker"],
            target_team=record["target"],
            problem=self.store.config.problem,
            category_claim=record["category_claim"],
            payload=record["payload"],
            report_id=record["report_id"],
        )
        prior = [
            r
            for r in self.store._accepted_reports()
            if r.breaker_team == record["breaker"]
            and r.target_team == record["target"]
        ]
        result = adjudicate(submission, target, self.ctx, prior_accepted=prior)
        return {
            "status": result.status,
            "category": result.category,
            "reason": result.reason,
        }

    def judge_pending(self) -> list[str]:
        """Adjudicate every break that has no verdict yet (the async path)."""
        verdicts = self.store._verdicts()
        processed = []
        for report_id, record in self.store._breaks().items():
            if report_id in verdicts:
                continue
            outcome = self.adjudicator(
                {
                    "report_id": report_id,
                    "breaker": record["breaker"],
                    "target": record["target"],
                    "category_claim": record["category_claim"],
                    "payload": record["payload"],
                }
            )
            self.store.record_break_verdict(
                report_id,
                outcome.get("status", "rejected"),
                outcome.get("category"),
                outcome.get("reason", ""),
            )
            processed.append(report_id)
        return processed

    # -- fixes ---------------------------------------------------------------

    def precheck_and_decide_fix(
        self, fix_id: str, approved: bool, judge: str, rationale: str
    ) -> dict:
        """Run mechanical prechecks on a fix bundle, then record the ruling."""
        from ..judge.fixes import Fix, validate_fix

        fixes = self.store._fixes()
        fix_record = fixes.get(fix_id)
        if fix_record is None:
            raise KeyError(fix_id)
        bundle_ref = fix_record.get("bundle_ref")
        if not bundle_ref:
            raise ValueError("fix carries no bundle")
        breaks = self.store._breaks()
        covered = [
            BreakSubmission(
                breaker_team=breaks[rid]["breaker"],
                target_team=breaks[rid]["target"],
                problem=self.store.config.problem,
                category_claim=breaks[rid]["category_claim"],
                payload=breaks[rid]["payload"],
                report_id=rid,
            )
            for rid in fix_record["covered_report_ids"]
        ]
        fix = Fix(
            fix_id=fix_id,
            builder_team=fix_record["team"],
            problem=self.store.config.problem,
            bundle=self._unpacked(bundle_ref),
            covered_report_ids=frozenset(fix_record["covered_report_ids"]),
        )
        decision = validate_fix(
            fix, covered, self.ctx, self.provider,
            judge_decision=approved, judge=judge, rationale=rationale,
        )
        precheck_ok = decision.judge != "system"
        self.store.record_fix_precheck(fix_id, precheck_ok, decision.precheck_log)
        self.store.record_fix_decision(
            fix_id, decision.approved, decision.judge or judge, decision.rationale
        )
        return {
            "approved": decision.approved,
            "rationale": decision.rationale,
            "precheck_log": decision.precheck_log,
        }
