import { ApiClient, ApiError } from "./api.js";
import type {
  ApiErrorBody,
  DecisionAction,
  LastRetrieval,
  RetrieveResponse,
  SessionDoc,
  SessionExport,
} from "./types.js";

export const BASE_METHODS = ["atm", "metamap", "umls"] as const;

/** fragment_id -> lowercased heading -> contributing base methods. */
export type BadgeMap = Map<string, Map<string, string[]>>;

export interface StoreState {
  session: SessionDoc | null;
  badges: BadgeMap;
  banner: ApiErrorBody | null;
  busy: boolean;
}

type Listener = (state: StoreState) => void;

function sameHeading(a: string, b: string): boolean {
  return a.toLowerCase() === b.toLowerCase();
}

/** Client-side session state: a projection of the server's session document
 * plus provenance badges and a transient error banner. All mutations go
 * through a single promise queue so decision calls reach the server in
 * order, mirroring its per-session serialization. */
export class SessionStore {
  readonly api: ApiClient;
  private state: StoreState = { session: null, badges: new Map(), banner: null, busy: false };
  private listeners: Listener[] = [];
  private chain: Promise<void> = Promise.resolve();

  constructor(api: ApiClient) {
    this.api = api;
  }

  getState(): StoreState {
    return this.state;
  }

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  /** Resolves when every queued call so far has settled. */
  idle(): Promise<void> {
    return this.chain;
  }

  private notify(): void {
    for (const fn of this.listeners) {
      fn(this.state);
    }
  }

  private enqueue(task: () => Promise<void>): Promise<void> {
    const run = this.chain.then(task).catch((err) => {
      this.state.banner = err instanceof ApiError
        ? err.body?.error ?? { message: err.message }
        : { message: String(err) };
      this.notify();
    });
    this.chain = run;
    return run;
  }

  loadSession(body: { topic_id?: string; query?: string; method?: string }): Promise<void> {
    return this.enqueue(async () => {
      this.state = { session: null, badges: new Map(), banner: null, busy: true };
      this.notify();
      try {
        const session = await this.api.createSession(body);
        const badges = await this.fetchBadges(session);
        this.state = { session, badges, banner: null, busy: false };
      } catch (err) {
        if (!(err instanceof ApiError)) {
          throw err;
        }
        this.state = {
          session: null,
          badges: new Map(),
          banner: err.body?.error ?? { message: err.message },
          busy: false,
        };
      }
      this.notify();
    });
  }

  /** Which base methods suggested each heading. Fused rankings lose the
   * per-method labels, so ask the stateless endpoint once per method and
   * fragment; a method that cannot map a fragment contributes no badges. */
  private async fetchBadges(session: SessionDoc): Promise<BadgeMap> {
    const badges: BadgeMap = new Map();
    if (session.method !== "fusion") {
      return badges;
    }
    for (const frag of session.fragments) {
      const byHeading = new Map<string, string[]>();
      for (const method of BASE_METHODS) {
        let candidates;
        try {
          ({ candidates } = await this.api.suggest(frag.fragment_query, method));
        } catch {
          continue;
        }
        for (const c of candidates) {
          const key = c.heading.toLowerCase();
          const methods = byHeading.get(key) ?? [];
          if (!methods.includes(method)) {
            methods.push(method);
          }
          byHeading.set(key, methods);
        }
      }
      badges.set(frag.fragment_id, byHeading);
    }
    return badges;
  }

  /** Optimistic local flip, then the server call; the response document
   * replaces local state and the preview re-renders from GET /query. A
   * conflict re-fetches the whole session. */
  decide(fragmentId: string, heading: string, action: DecisionAction): Promise<void> {
    return this.enqueue(async () => {
      const session = this.state.session;
      if (!session) {
        return;
      }
      const frag = session.fragments.find((f) => f.fragment_id === fragmentId);
      if (frag) {
        frag.accepted = frag.accepted.filter((h) => !sameHeading(h, heading));
        frag.rejected = frag.rejected.filter((h) => !sameHeading(h, heading));
        if (action === "accept") {
          frag.accepted.push(heading);
        } else if (action === "reject") {
          frag.rejected.push(heading);
        }
        this.notify();
      }
      try {
        this.state.session = await this.api.decide(session.session_id, fragmentId, heading, action);
        this.state.banner = null;
        await this.refreshPreview();
      } catch (err) {
        if (!(err instanceof ApiError)) {
          throw err;
        }
        this.state.banner = err.body?.error ?? { message: err.message };
        this.state.session = await this.api.getSession(session.session_id);
      }
      this.notify();
    });
  }

  private async refreshPreview(): Promise<void> {
    const session = this.state.session;
    if (!session) {
      return;
    }
    try {
      const q = await this.api.getQuery(session.session_id);
      session.preview_query = q.query;
      session.preview_error = null;
    } catch (err) {
      if (!(err instanceof ApiError)) {
        throw err;
      }
      session.preview_query = null;
      session.preview_error = err.body?.error ?? { message: err.message };
    }
  }

  /** Run the preview query; the strip state mirrors what the server stores
   * on the session (the response minus envelope fields). */
  retrieve(): Promise<void> {
    return this.enqueue(async () => {
      const session = this.state.session;
      if (!session) {
        return;
      }
      let response: RetrieveResponse;
      try {
        response = await this.api.retrieve(session.session_id);
        this.state.banner = null;
      } catch (err) {
        if (!(err instanceof ApiError)) {
          throw err;
        }
        if (err.body?.retrieved === undefined) {
          this.state.banner = err.body?.error ?? { message: err.message };
          this.notify();
          return;
        }
        response = err.body as RetrieveResponse;
        this.state.banner = response.error ?? null;
      }
      const { schema_version: _v, error: _e, ...stored } = response;
      session.last_retrieval = stored as LastRetrieval;
      this.notify();
    });
  }

  /** Recreate a session from an exported document and adopt it. */
  importSession(doc: SessionExport): Promise<void> {
    return this.enqueue(async () => {
      try {
        const session = await this.api.importSession(doc);
        const badges = await this.fetchBadges(session);
        this.state = { session, badges, banner: null, busy: false };
      } catch (err) {
        if (!(err instanceof ApiError)) {
          throw err;
        }
        this.state.banner = err.body?.error ?? { message: err.message };
      }
      this.notify();
    });
  }

  /** Replace local state with a fresh server fetch. */
  refetch(): Promise<void> {
    return this.enqueue(async () => {
      const session = this.state.session;
      if (!session) {
        return;
      }
      this.state.session = await this.api.getSession(session.session_id);
      this.notify();
    });
  }
}
