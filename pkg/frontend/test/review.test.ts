/** Fix-review queue contract: items assemble from the event feed and
 * transition out once ruled on. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import type { EventsPayload } from "../src/api.js";
import {
  DecisionGate,
  pendingItems,
  reviewQueue,
  validateDecision,
} from "../src/review.js";

function fixture<T>(name: string): T {
  const path = join(__dirname, "..", "fixtures", `${name}.json`);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

const meta = fixture<{ fix_id: string; failing_fix_id: string }>("meta");
const beforeRuling = fixture<EventsPayload>("events_admin");
const afterRuling = fixture<EventsPayload>("events_after_fix");

describe("review queue", () => {
  it("builds items for each submitted fix", () => {
    const items = reviewQueue(beforeRuling.events);
    const ids = items.map((i) => i.fixId);
    expect(ids).toContain(meta.fix_id);
    expect(ids).toContain(meta.failing_fix_id);
  });

  it("enables the decision control only for green prechecks", () => {
    const items = reviewQueue(beforeRuling.events);
    const good = items.find((i) => i.fixId === meta.fix_id)!;
    const bad = items.find((i) => i.fixId === meta.failing_fix_id)!;
    expect(good.precheckOk).toBe(true);
    expect(good.decisionEnabled).toBe(true);
    expect(bad.precheckOk).toBe(false);
    expect(bad.decisionEnabled).toBe(false);
  });

  it("approval removes the item from the pending queue", () => {
    const before = pendingItems(reviewQueue(beforeRuling.events));
    const after = pendingItems(reviewQueue(afterRuling.events));
    expect(before.map((i) => i.fixId)).toContain(meta.fix_id);
    expect(after.map((i) => i.fixId)).not.toContain(meta.fix_id);
    const ruled = reviewQueue(afterRuling.events).find(
      (i) => i.fixId === meta.fix_id,
    )!;
    expect(ruled.decided).toBe(true);
    expect(ruled.approved).toBe(true);
  });

  it("requires a rationale for rejection", () => {
    const item = reviewQueue(beforeRuling.events).find(
      (i) => i.fixId === meta.fix_id,
    )!;
    expect(
      validateDecision(item, { fixId: item.fixId, approved: false, rationale: "" }),
    ).toMatch(/rationale/);
    expect(
      validateDecision(item, {
        fixId: item.fixId,
        approved: false,
        rationale: "touches two subsystems",
      }),
    ).toBeNull();
    expect(
      validateDecision(item, { fixId: item.fixId, approved: true, rationale: "" }),
    ).toBeNull();
  });

  it("blocks double-submission of the same decision", () => {
    const gate = new DecisionGate();
    expect(gate.begin("fix-1")).toBe(true);
    expect(gate.begin("fix-1")).toBe(false);
    gate.finish("fix-1");
    expect(gate.begin("fix-1")).toBe(true);
  });

  it("team-visible feeds omit foreign fix bodies but keep metadata", () => {
    const teamFeed = fixture<EventsPayload>("events_team_view");
    const fixEvents = teamFeed.events.filter((e) => e.kind === "fix");
    expect(fixEvents.length).toBeGreaterThan(0);
    const foreign = fixEvents.find(
      (e) => e.payload["fix_id"] === meta.failing_fix_id,
    )!;
    expect(foreign.payload["diff_ref"]).toBeUndefined();
    const items = reviewQueue(teamFeed.events);
    expect(items.map((i) => i.fixId)).toContain(meta.failing_fix_id);
  });
});
