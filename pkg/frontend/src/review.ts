/**
 * Fix-review queue: assembled from the event feed, decided over the API.
 *
 * A fix enters the queue when its `fix` event arrives; precheck results
 * attach from precheck judge-decision events; a ruling removes it from the
 * queue. The decision control only renders for fixes whose prechecks are
 * green, and a rejection always requires a rationale.
 */

import type { EventPayload } from "./api.js";

export interface ReviewItem {
  fixId: string;
  team: string;
  coveredReportIds: string[];
  diffRef: string;
  precheckOk: boolean | null; // null: prechecks have not reported yet
  precheckLog: string;
  decided: boolean;
  approved: boolean | null;
  decisionEnabled: boolean;
}

export function reviewQueue(events: readonly EventPayload[]): ReviewItem[] {
  const items = new Map<string, ReviewItem>();
  for (const event of events) {
    const payload = event.payload;
    if (event.kind === "fix") {
      const fixId = String(payload["fix_id"]);
      items.set(fixId, {
        fixId,
        team: String(payload["team"] ?? ""),
        coveredReportIds: (payload["covered_report_ids"] as string[]) ?? [],
        diffRef: String(payload["diff_ref"] ?? ""),
        precheckOk: null,
        precheckLog: "",
        decided: false,
        approved: null,
        decisionEnabled: false,
      });
    } else if (event.kind === "judge-decision" && "fix_id" in payload) {
      const item = items.get(String(payload["fix_id"]));
      if (item === undefined) continue;
      if (payload["precheck"] === true) {
        item.precheckOk = Boolean(payload["ok"]);
        item.precheckLog = String(payload["log"] ?? "");
      } else {
        item.decided = true;
        item.approved = Boolean(payload["approved"]);
      }
    }
  }
  for (const item of items.values()) {
    item.decisionEnabled = item.precheckOk === true && !item.decided;
  }
  return [...items.values()];
}

/** Only undecided fixes belong in the working queue; precheck failures are
 * shown as auto-rejected with no decision control. */
export function pendingItems(items: readonly ReviewItem[]): ReviewItem[] {
  return items.filter((item) => !item.decided);
}

export interface DecisionDraft {
  fixId: string;
  approved: boolean;
  rationale: string;
}

export function validateDecision(
  item: ReviewItem,
  draft: DecisionDraft,
): string | null {
  if (!item.decisionEnabled) {
    return "prechecks must pass before a ruling";
  }
  if (!draft.approved && draft.rationale.trim() === "") {
    return "a rejection requires a rationale";
  }
  return null;
}

/** Client-side double-click guard: one in-flight decision per fix. */
export class DecisionGate {
  private inFlight = new Set<string>();

  begin(fixId: string): boolean {
    if (this.inFlight.has(fixId)) return false;
    this.inFlight.add(fixId);
    return true;
  }

  finish(fixId: string): void {
    this.inFlight.delete(fixId);
  }
}
