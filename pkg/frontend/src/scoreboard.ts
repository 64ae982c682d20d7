/**
 * Scoreboard view-model: API rows plus a per-poll trend delta.
 *
 * The board displays API values verbatim; the only client-side arithmetic
 * is the trend (total now minus total at the previous poll). Sorting is
 * stable under ties by falling back to the team id.
 */

import type { BoardRowPayload, ScoreboardPayload } from "./api.js";

export interface BoardRow extends BoardRowPayload {
  trend: number;
}

export type SortColumn = "total" | "ship" | "resilience" | "break_score" | "team";

export interface BoardState {
  rows: BoardRow[];
  lastSeq: number;
  phase: string;
  stale: boolean;
}

export function emptyBoard(): BoardState {
  return { rows: [], lastSeq: 0, phase: "build", stale: false };
}

/** Fold one successful poll into the previous state. */
export function applyPoll(
  previous: BoardState,
  payload: ScoreboardPayload,
): BoardState {
  const before = new Map(previous.rows.map((row) => [row.team, row]));
  const rows = payload.rows.map((row) => {
    const earlier = before.get(row.team);
    const trend =
      earlier === undefined
        ? 0
        : Number(row.total) - Number(earlier.total);
    return { ...row, trend };
  });
  return {
    rows,
    lastSeq: payload.last_seq,
    phase: payload.phase,
    stale: false,
  };
}

/** A failed poll keeps the last good data and raises the stale badge. */
export function markStale(previous: BoardState): BoardState {
  return { ...previous, stale: true };
}

export function sortRows(
  rows: readonly BoardRow[],
  column: SortColumn,
): BoardRow[] {
  const sorted = [...rows];
  sorted.sort((a, b) => {
    if (column !== "team") {
      const diff = Number(b[column]) - Number(a[column]);
      if (diff !== 0) return diff;
    }
    return a.team < b.team ? -1 : a.team > b.team ? 1 : 0;
  });
  return sorted;
}
