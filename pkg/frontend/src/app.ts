/**
 * Single-page wiring: live standings, the target browser, and the judges'
 * fix-review workbench, all polling the contest service.
 */

import { ApiError, ContestApi } from "./api.js";
import { Poller } from "./poll.js";
import {
  applyPoll,
  BoardState,
  emptyBoard,
  markStale,
  SortColumn,
  sortRows,
} from "./scoreboard.js";
import { groupByLanguage, targetViews } from "./targets.js";
import {
  DecisionGate,
  ReviewItem,
  reviewQueue,
  validateDecision,
} from "./review.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  private api: ContestApi;
  private board: BoardState = emptyBoard();
  private sortColumn: SortColumn = "total";
  private gate = new DecisionGate();
  private root: HTMLElement;

  constructor(root: HTMLElement, baseUrl: string, token: string) {
    this.root = root;
    this.api = new ContestApi(baseUrl, token);
  }

  start(): void {
    const boardPoller = new Poller(() => this.refreshBoard(), 2000);
    boardPoller.start();
    const panelPoller = new Poller(() => this.refreshPanels(), 4000);
    panelPoller.start();
  }

  private async refreshBoard(): Promise<void> {
    try {
      this.board = applyPoll(this.board, await this.api.scoreboard());
    } catch {
      this.board = markStale(this.board);
    }
    this.renderBoard();
  }

  private renderBoard(): void {
    const host = this.root.querySelector("#scoreboard");
    if (!host) return;
    host.replaceChildren();
    const status = el(
      "div",
      this.board.stale ? "badge stale" : "badge live",
      this.board.stale
        ? `stale (seq ${this.board.lastSeq})`
        : `${this.board.phase} phase, seq ${this.board.lastSeq}`,
    );
    host.appendChild(status);
    const table = el("table");
    const head = el("tr");
    const columns: [string, SortColumn][] = [
      ["team", "team"],
      ["ship", "ship"],
      ["resilience", "resilience"],
      ["break", "break_score"],
      ["total", "total"],
    ];
    for (const [label, column] of columns) {
      const cell = el("th", undefined, label);
      cell.addEventListener("click", () => {
        this.sortColumn = column;
        this.renderBoard();
      });
      head.appendChild(cell);
    }
    table.appendChild(head);
    for (const row of sortRows(this.board.rows, this.sortColumn)) {
      const tr = el("tr");
      tr.appendChild(el("td", undefined, row.team));
      tr.appendChild(el("td", "num", row.ship));
      tr.appendChild(el("td", "num", row.resilience));
      tr.appendChild(el("td", "num", row.break_score));
      const total = el("td", "num", row.total);
      if (row.trend !== 0) {
        total.appendChild(
          el("span", row.trend > 0 ? "trend up" : "trend down",
             ` ${row.trend > 0 ? "+" : ""}${row.trend.toFixed(2)}`),
        );
      }
      tr.appendChild(total);
      table.appendChild(tr);
    }
    host.appendChild(table);
  }

  private async refreshPanels(): Promise<void> {
    await Promise.all([this.refreshTargets(), this.refreshReview()]);
  }

  private async refreshTargets(): Promise<void> {
    const host = this.root.querySelector("#targets");
    if (!host) return;
    try {
      const { targets } = await this.api.targets();
      host.replaceChildren();
      for (const group of groupByLanguage(targetViews(targets))) {
        host.appendChild(el("h3", undefined, group.language));
        for (const target of group.targets) {
          const row = el("div", "target");
          row.appendChild(
            el("span", undefined,
               `${target.team} (${target.submission_id}) — ` +
               `${target.remaining_reports} reports left`),
          );
          const button = el("button", undefined, "submit break");
          button.disabled = !target.submitEnabled;
          row.appendChild(button);
          host.appendChild(row);
        }
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        host.replaceChildren(el("div", "hint", "targets open in the break phase"));
      }
    }
  }

  private async refreshReview(): Promise<void> {
    const host = this.root.querySelector("#review");
    if (!host) return;
    try {
      const feed = await this.api.events(0);
      const items = reviewQueue(feed.events);
      host.replaceChildren();
      for (const item of items) {
        const card = el("div", "review-item");
        card.appendChild(
          el("h4", undefined, `${item.fixId} by ${item.team}`),
        );
        card.appendChild(
          el("div", undefined, `covers: ${item.coveredReportIds.join(", ")}`),
        );
        card.appendChild(el("pre", "diff", item.diffRef));
        const precheck =
          item.precheckOk === null
            ? "prechecks running"
            : item.precheckOk
              ? "prechecks green"
              : "auto-rejected by prechecks";
        card.appendChild(el("div", "precheck", precheck));
        if (item.precheckLog) {
          card.appendChild(el("pre", "log", item.precheckLog));
        }
        if (item.decided) {
          card.appendChild(
            el("div", "ruling", item.approved ? "approved" : "rejected"),
          );
        } else if (item.decisionEnabled) {
          card.appendChild(this.decisionControls(item));
        }
        host.appendChild(card);
      }
    } catch {
      // review data needs the admin token; leave the panel as-is
    }
  }

  private decisionControls(item: ReviewItem): HTMLElement {
    const fixId = item.fixId;
    const controls = el("div", "decision");
    const rationale = el("input") as HTMLInputElement;
    rationale.placeholder = "rationale";
    const submit = (approved: boolean) => {
      const draft = { fixId, approved, rationale: rationale.value };
      const error = validateDecision(item, draft);
      if (error !== null) {
        controls.appendChild(el("div", "error", error));
        return;
      }
      if (!this.gate.begin(fixId)) return;
      this.api
        .fixDecision({
          fix_id: fixId,
          approved,
          rationale: draft.rationale,
        })
        .finally(() => this.gate.finish(fixId));
    };
    const approve = el("button", undefined, "approve");
    approve.addEventListener("click", () => submit(true));
    const reject = el("button", undefined, "reject");
    reject.addEventListener("click", () => submit(false));
    controls.append(rationale, approve, reject);
    return controls;
  }
}

export function mount(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const app = new App(
    root,
    params.get("api") ?? "",
    params.get("token") ?? "",
  );
  app.start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount();
}
