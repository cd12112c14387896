import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import type { FetchLike } from "../src/api.js";
import type { DecisionAction, SessionExport } from "../src/types.js";

export interface Exchange {
  method: string;
  url: string;
  body: unknown;
  status: number;
  response: unknown;
}

export interface Recording {
  session_id: string;
  exchanges: Exchange[];
  actions?: { fragment_id: string; heading: string; action: DecisionAction }[];
  import_body?: SessionExport;
}

export function loadRecording(name: string): Recording {
  const path = resolve(process.cwd(), "tests", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf-8")) as Recording;
}

function stable(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(stable);
  }
  if (value !== null && typeof value === "object") {
    return Object.fromEntries(
      Object.entries(value as Record<string, unknown>)
        .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
        .map(([k, v]) => [k, stable(v)]),
    );
  }
  return value;
}

/** Encoding-insensitive request identity: method, decoded path, sorted
 * decoded query params, and the JSON body with sorted keys. */
export function canonicalKey(method: string, url: string, body: unknown): string {
  const u = new URL(url, "http://replay.local");
  const params = [...u.searchParams.entries()].sort(
    (a, b) => a[0].localeCompare(b[0]) || a[1].localeCompare(b[1]),
  );
  return JSON.stringify([method.toUpperCase(), decodeURIComponent(u.pathname), params, stable(body ?? null)]);
}

/** Replays recorded exchanges keyed by request identity, FIFO per key.
 * An unrecorded request fails the test loudly instead of inventing data. */
export class ReplayFetch {
  private queues = new Map<string, Exchange[]>();

  constructor(recording: Recording) {
    for (const e of recording.exchanges) {
      const key = canonicalKey(e.method, e.url, e.body);
      const queue = this.queues.get(key) ?? [];
      queue.push(e);
      this.queues.set(key, queue);
    }
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body !== undefined ? JSON.parse(String(init.body)) : null;
    const queue = this.queues.get(canonicalKey(method, url, body));
    if (!queue || queue.length === 0) {
      throw new Error(`no recorded exchange for ${method} ${url}` +
        (init?.body ? ` body=${String(init.body)}` : ""));
    }
    const e = queue.shift()!;
    return new Response(JSON.stringify(e.response), {
      status: e.status,
      headers: { "content-type": "application/json" },
    });
  };

  /** Exchanges recorded but never requested. */
  pending(): number {
    let n = 0;
    for (const queue of this.queues.values()) {
      n += queue.length;
    }
    return n;
  }
}
