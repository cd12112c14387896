import type {
  DecisionAction,
  QueryResponse,
  RetrieveResponse,
  SessionDoc,
  SessionExport,
  SuggestResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx response, carrying the server's error body. */
export class ApiError extends Error {
  readonly status: number;
  readonly body: any;

  constructor(status: number, body: any) {
    super(body?.error?.message ?? `request failed with status ${status}`);
    this.status = status;
    this.body = body;
  }
}

/** Thin typed client over the review service; every method resolves to the
 * parsed JSON body or rejects with ApiError. */
export class ApiClient {
  private readonly fetchFn: FetchLike;
  private readonly base: string;

  constructor(fetchFn: FetchLike, base = "") {
    this.fetchFn = fetchFn;
    this.base = base.replace(/\/$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.base + path, init);
    const parsed = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, parsed);
    }
    return parsed as T;
  }

  createSession(body: { topic_id?: string; query?: string; method?: string }): Promise<SessionDoc> {
    return this.request("POST", "/api/sessions", body);
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request("GET", `/api/sessions/${encodeURIComponent(sessionId)}`);
  }

  decide(sessionId: string, fragmentId: string, heading: string, action: DecisionAction): Promise<SessionDoc> {
    const path = `/api/sessions/${encodeURIComponent(sessionId)}/fragments/${encodeURIComponent(fragmentId)}/decision`;
    return this.request("POST", path, { heading, action });
  }

  getQuery(sessionId: string): Promise<QueryResponse> {
    return this.request("GET", `/api/sessions/${encodeURIComponent(sessionId)}/query`);
  }

  retrieve(sessionId: string): Promise<RetrieveResponse> {
    return this.request("POST", `/api/sessions/${encodeURIComponent(sessionId)}/retrieve`);
  }

  suggest(fragment: string, method: string): Promise<SuggestResponse> {
    const params = new URLSearchParams({ fragment, method });
    return this.request("GET", `/api/suggest?${params.toString()}`);
  }

  exportSession(sessionId: string): Promise<SessionExport> {
    return this.request("GET", `/api/sessions/${encodeURIComponent(sessionId)}/export`);
  }

  importSession(doc: SessionExport): Promise<SessionDoc> {
    return this.request("POST", "/api/sessions/import", doc);
  }
}
