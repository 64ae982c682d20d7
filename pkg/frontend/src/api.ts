/**
 * Typed client for the contest service HTTP API.
 *
 * Every number the UI shows comes from these payloads verbatim; the client
 * layer never recomputes scores. Mutating calls carry a generated request
 * id so an accidental double-submit is recognizable server-side.
 */

export interface BoardRowPayload {
  team: string;
  qualified: boolean;
  ship: string;
  resilience: string;
  break_score: string;
  total: string;
  defects: string[];
}

export interface ScoreboardPayload {
  rows: BoardRowPayload[];
  last_seq: number;
  phase: string;
}

export interface TargetPayload {
  submission_id: string;
  team: string;
  language: string;
  remaining_reports: number;
}

export interface EventPayload {
  seq: number;
  timestamp: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface EventsPayload {
  events: EventPayload[];
  last_seq: number;
}

export interface FixDecisionRequest {
  fix_id: string;
  approved: boolean;
  rationale: string;
  judge?: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

function requestId(): string {
  return Math.random().toString(36).slice(2) + Date.now().toString(36);
}

export class ContestApi {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async call<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {
      Authorization: `Bearer ${this.token}`,
    };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      headers["X-Request-Id"] = requestId();
    }
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  scoreboard(): Promise<ScoreboardPayload> {
    return this.call<ScoreboardPayload>("GET", "/scoreboard");
  }

  targets(): Promise<{ targets: TargetPayload[] }> {
    return this.call("GET", "/targets");
  }

  events(since: number): Promise<EventsPayload> {
    return this.call("GET", `/events?since=${since}`);
  }

  submitBreak(body: {
    target_team: string;
    category_claim: string;
    payload: Record<string, unknown>;
  }): Promise<{ report_id: string }> {
    return this.call("POST", "/breaks", body);
  }

  fixDecision(body: FixDecisionRequest): Promise<{ approved: boolean }> {
    return this.call("POST", "/admin/fix-decision", body);
  }
}
