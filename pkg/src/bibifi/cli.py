"""bibifi-admin: operate a contest from the command line.

    init        create a contest store (prints the admin token)
    serve       run the HTTP API with the real evaluation/judging pipeline
    phase       advance the contest phase
    evaluate    build and test one submission bundle locally
    adjudicate  judge all pending break reports in a store
    demo        run the scripted three-team mini-contest end to end
    report      export scoreboard/breaks CSV plus rendered figures
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _store(args):
    from .service.store import ContestConfig, ContestStore

    root = Path(args.store)
    if not (root / "config.json").exists():
        raise SystemExit(f"no contest store at {root} (run init first)")
    config = ContestConfig(**json.loads((root / "config.json").read_text()))
    return ContestStore(root, config)


def cmd_init(args) -> int:
    from .service.store import ContestConfig, ContestStore

    config = ContestConfig(
        problem=args.problem, multiplier=args.multiplier, seed=args.seed
    )
    store = ContestStore(Path(args.store), config)
    print(f"store: {store.root}")
    print(f"problem: {config.problem}  multiplier: {config.multiplier}")
    print(f"admin token: {store.admin_token}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.api import create_app
    from .service.wiring import Pipeline

    store = _store(args)
    pipeline = Pipeline(store, Path(args.workdir), quick=args.quick)
    app = create_app(store, evaluator=pipeline.evaluator, adjudicator=pipeline.adjudicator)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_phase(args) -> int:
    store = _store(args)
    record = store.set_phase(args.phase)
    print(f"phase -> {args.phase} (seq {record.seq})")
    return 0


def cmd_evaluate(args) -> int:
    from .runner.evaluate import evaluate_submission
    from .runner.isolation import LocalSandboxProvider
    from .runner.problems import problem_descriptor

    problem = problem_descriptor(args.problem)
    provider = LocalSandboxProvider()
    evidence = evaluate_submission(Path(args.bundle), problem, provider)
    doc = {
        "qualified": evidence.qualified,
        "correctness": [
            {"test_id": o.test_id, "kind": o.kind, "passed": o.passed}
            for o in evidence.correctness
        ],
        "performance": [
            {"test_id": o.test_id, "measure": str(o.measure)}
            for o in evidence.performance
        ],
    }
    print(json.dumps(doc, indent=2))
    return 0 if evidence.qualified else 1


def cmd_adjudicate(args) -> int:
    from .service.wiring import Pipeline

    store = _store(args)
    pipeline = Pipeline(store, Path(args.workdir))
    processed = pipeline.judge_pending()
    for report_id in processed:
        verdict = store._verdicts()[report_id]
        print(f"{report_id}: {verdict['status']} ({verdict.get('category') or '-'})")
    print(f"{len(processed)} report(s) adjudicated")
    return 0


def cmd_report(args) -> int:
    from .report import write_report

    store = _store(args)
    for path in write_report(store, Path(args.out)):
        print(path)
    return 0


def cmd_demo(args) -> int:
    from .demo import run_demo

    summary = run_demo(Path(args.store), Path(args.workdir), verbose=True)
    print(json.dumps(summary["scoreboard"], indent=2, sort_keys=True))
    return 0 if summary["replay_matches"] else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="bibifi-admin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a contest store")
    p.add_argument("--store", required=True)
    p.add_argument("--problem", default="securelog",
                   choices=["securelog", "atm", "ehr"])
    p.add_argument("--multiplier", type=int, default=50)
    p.add_argument("--seed", type=int, default=20160901)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--store", required=True)
    p.add_argument("--workdir", default="/tmp/bibifi-work")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--quick", action="store_true",
                   help="single performance repetition per test")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("phase", help="advance the contest phase")
    p.add_argument("--store", required=True)
    p.add_argument("--phase", required=True,
                   choices=["build", "break", "fix", "closed"])
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("evaluate", help="evaluate one submission bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--problem", required=True,
                   choices=["securelog", "atm", "ehr"])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("adjudicate", help="judge pending break reports")
    p.add_argument("--store", required=True)
    p.add_argument("--workdir", default="/tmp/bibifi-work")
    p.set_defaults(func=cmd_adjudicate)

    p = sub.add_parser("demo", help="run the scripted mini-contest")
    p.add_argument("--store", required=True)
    p.add_argument("--workdir", default="/tmp/bibifi-demo-work")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("report", help="export CSV and figures")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
