/** Target browser contract: server ordering preserved, budgets respected. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import type { TargetPayload } from "../src/api.js";
import { groupByLanguage, targetViews } from "../src/targets.js";

function fixture<T>(name: string): T {
  const path = join(__dirname, "..", "fixtures", `${name}.json`);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

const alpha = fixture<{ targets: TargetPayload[] }>("targets_alpha");
const bravo = fixture<{ targets: TargetPayload[] }>("targets_bravo");

describe("target browser", () => {
  it("preserves the API ordering exactly", () => {
    const views = targetViews(alpha.targets);
    expect(views.map((v) => v.submission_id)).toEqual(
      alpha.targets.map((t) => t.submission_id),
    );
  });

  it("different teams see their own randomized order", () => {
    // the recorded fixtures come from the same qualifying set
    const alphaTeams = alpha.targets.map((t) => t.team).sort();
    const bravoTeams = bravo.targets.map((t) => t.team).sort();
    expect(alphaTeams).not.toEqual(bravoTeams); // self is excluded
    const shared = alpha.targets
      .filter((t) => bravoTeams.includes(t.team))
      .map((t) => t.team);
    expect(shared.length).toBeGreaterThan(0);
  });

  it("disables the submit control when the budget is exhausted", () => {
    const drained = targetViews([
      { ...alpha.targets[0]!, remaining_reports: 0 },
      { ...alpha.targets[1]!, remaining_reports: 3 },
    ]);
    expect(drained[0]!.submitEnabled).toBe(false);
    expect(drained[1]!.submitEnabled).toBe(true);
  });

  it("groups by language tag preserving inner order", () => {
    const mixed = targetViews([
      { submission_id: "s1", team: "t1", language: "c", remaining_reports: 5 },
      { submission_id: "s2", team: "t2", language: "python", remaining_reports: 5 },
      { submission_id: "s3", team: "t3", language: "c", remaining_reports: 5 },
    ]);
    const groups = groupByLanguage(mixed);
    expect(groups.map((g) => g.language)).toEqual(["c", "python"]);
    expect(groups[0]!.targets.map((t) => t.submission_id)).toEqual(["s1", "s3"]);
  });
});
