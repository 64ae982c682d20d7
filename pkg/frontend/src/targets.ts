/**
 * Target browser view-model.
 *
 * The server already randomizes each team's view; the list order here must
 * match the API payload exactly. Budgets come from the payload too: a
 * target with no remaining reports gets its submit control disabled.
 */

import type { TargetPayload } from "./api.js";

export interface TargetView extends TargetPayload {
  submitEnabled: boolean;
}

export function targetViews(targets: readonly TargetPayload[]): TargetView[] {
  return targets.map((target) => ({
    ...target,
    submitEnabled: target.remaining_reports > 0,
  }));
}

/** Group for display by language tag, preserving order inside each group
 * and ordering groups by their first appearance. */
export function groupByLanguage(
  targets: readonly TargetView[],
): { language: string; targets: TargetView[] }[] {
  const groups = new Map<string, TargetView[]>();
  for (const target of targets) {
    const key = target.language || "unknown";
    const bucket = groups.get(key);
    if (bucket === undefined) {
      groups.set(key, [target]);
    } else {
      bucket.push(target);
    }
  }
  return [...groups.entries()].map(([language, grouped]) => ({
    language,
    targets: grouped,
  }));
}
