/** Scoreboard contract: rendered rows come from the API payload verbatim. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import type { ScoreboardPayload } from "../src/api.js";
import {
  applyPoll,
  emptyBoard,
  markStale,
  sortRows,
} from "../src/scoreboard.js";

function fixture<T>(name: string): T {
  const path = join(__dirname, "..", "fixtures", `${name}.json`);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

const empty = fixture<ScoreboardPayload>("scoreboard_empty");
const preFix = fixture<ScoreboardPayload>("scoreboard_prefix");
const afterFix = fixture<ScoreboardPayload>("scoreboard_after_fix");

describe("scoreboard fold", () => {
  it("renders the empty contest as an empty board", () => {
    const board = applyPoll(emptyBoard(), empty);
    expect(board.rows).toEqual([]);
    expect(board.stale).toBe(false);
  });

  it("mirrors API values without recomputing them", () => {
    const board = applyPoll(emptyBoard(), preFix);
    expect(board.rows.map((r) => r.team)).toEqual(
      preFix.rows.map((r) => r.team),
    );
    for (const [index, row] of board.rows.entries()) {
      const payload = preFix.rows[index]!;
      expect(row.ship).toBe(payload.ship);
      expect(row.resilience).toBe(payload.resilience);
      expect(row.break_score).toBe(payload.break_score);
      expect(row.total).toBe(payload.total);
    }
    expect(board.lastSeq).toBe(preFix.last_seq);
  });

  it("computes trends as deltas between polls", () => {
    const first = applyPoll(emptyBoard(), preFix);
    const second = applyPoll(first, afterFix);
    const byTeam = new Map(second.rows.map((r) => [r.team, r]));
    for (const row of afterFix.rows) {
      const before = preFix.rows.find((r) => r.team === row.team)!;
      const expected = Number(row.total) - Number(before.total);
      expect(byTeam.get(row.team)!.trend).toBeCloseTo(expected, 6);
    }
  });

  it("fix approval re-renders the split the API reports", () => {
    // two breakers shared the defect: P/N halves their award, and the
    // builder's resilience improves to a single deduction
    const before = new Map(preFix.rows.map((r) => [r.team, r]));
    const after = new Map(afterFix.rows.map((r) => [r.team, r]));
    expect(before.get("team-002")!.break_score).toBe("100.00");
    expect(after.get("team-002")!.break_score).toBe("50.00");
    expect(before.get("team-001")!.resilience).toBe("-200.00");
    expect(after.get("team-001")!.resilience).toBe("-100.00");
  });

  it("keeps last-good data and raises the stale badge on failure", () => {
    const board = applyPoll(emptyBoard(), preFix);
    const stale = markStale(board);
    expect(stale.stale).toBe(true);
    expect(stale.rows).toEqual(board.rows);
  });

  it("sorts stably with the team id as tiebreak", () => {
    const board = applyPoll(emptyBoard(), preFix);
    const byBreak = sortRows(board.rows, "break_score");
    // team-002 and team-003 tie on break score; team id breaks the tie
    const tied = byBreak.filter((r) => r.break_score === "100.00");
    expect(tied.map((r) => r.team)).toEqual(["team-002", "team-003"]);
    const byTeam = sortRows(board.rows, "team");
    expect(byTeam.map((r) => r.team)).toEqual(
      [...board.rows.map((r) => r.team)].sort(),
    );
  });
});
