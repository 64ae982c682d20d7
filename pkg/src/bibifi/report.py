"""Contest reporting: delimited exports plus rendered figures.

`write_report` drops everything analysis needs into one directory: the
per-team scoreboard CSV, the per-report break CSV (the raw material for
population studies on future contests), and matplotlib figures for the
standings and the break-category mix.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .service.store import ContestStore  # noqa: E402

FIGURE_DPI = 150


def write_scoreboard_csv(store: ContestStore, path: Path) -> Path:
    board = store.scoreboard()
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["team", "qualified", "ship", "resilience", "break_score", "total"]
        )
        for row in board["rows"]:
            writer.writerow(
                [
                    row["team"],
                    int(row["qualified"]),
                    row["ship"],
                    row["resilience"],
                    row["break_score"],
                    row["total"],
                ]
            )
    return path


def write_breaks_csv(store: ContestStore, path: Path) -> Path:
    breaks = store._breaks()
    verdicts = store._verdicts()
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["report_id", "breaker", "target", "claimed", "category", "status"]
        )
        for report_id in sorted(breaks):
            record = breaks[report_id]
            verdict = verdicts.get(report_id, {})
            writer.writerow(
                [
                    report_id,
                    record["breaker"],
                    record["target"],
                    record["category_claim"],
                    verdict.get("category") or "",
                    verdict.get("status", "pending"),
                ]
            )
    return path


def plot_standings(store: ContestStore, path: Path) -> Path:
    board = store.scoreboard()
    rows = board["rows"]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.6 * len(rows) + 1.5)))
    if rows:
        teams = [r["team"] for r in rows]
        ship = [float(r["ship"]) for r in rows]
        resilience = [float(r["resilience"]) for r in rows]
        break_score = [float(r["break_score"]) for r in rows]
        positions = range(len(rows))
        height = 0.28
        ax.barh(
            [p + height for p in positions], ship, height, label="ship", color="#4c72b0"
        )
        ax.barh(positions, resilience, height, label="resilience", color="#c44e52")
        ax.barh(
            [p - height for p in positions],
            break_score,
            height,
            label="break",
            color="#55a868",
        )
        ax.set_yticks(list(positions))
        ax.set_yticklabels(teams)
        ax.axvline(0, color="black", linewidth=0.8)
        ax.legend(loc="best")
    else:
        ax.text(0.5, 0.5, "no teams yet", ha="center", va="center")
        ax.set_axis_off()
    ax.set_title(f"standings (phase: {board['phase']}, seq {board['last_seq']})")
    ax.set_xlabel("points")
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


def plot_break_categories(store: ContestStore, path: Path) -> Path:
    verdicts = store._verdicts()
    counts: dict[str, int] = {}
    for verdict in verdicts.values():
        if verdict.get("status") == "accepted":
            category = verdict.get("category") or "unknown"
            counts[category] = counts.get(category, 0) + 1
    fig, ax = plt.subplots(figsize=(6, 4))
    if counts:
        categories = sorted(counts)
        ax.bar(categories, [counts[c] for c in categories], color="#4c72b0")
        ax.set_ylabel("accepted reports")
    else:
        ax.text(0.5, 0.5, "no accepted breaks", ha="center", va="center")
        ax.set_axis_off()
    ax.set_title("accepted breaks by category")
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    return path


def write_report(store: ContestStore, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        write_scoreboard_csv(store, out_dir / "scoreboard.csv"),
        write_breaks_csv(store, out_dir / "breaks.csv"),
        plot_standings(store, out_dir / "standings.png"),
        plot_break_categories(store, out_dir / "break_categories.png"),
    ]
