import type { BadgeMap, StoreState } from "./store.js";
import type {
  ApiErrorBody,
  DecisionAction,
  FragmentDoc,
  LastRetrieval,
  SessionDoc,
  Suggestion,
} from "./types.js";
import { RESIDUAL_MODES } from "./types.js";

export interface Handlers {
  onDecide(fragmentId: string, heading: string, action: DecisionAction): void;
  onRetrieve(): void;
}

const METHOD_LETTERS: Record<string, string> = { atm: "A", metamap: "M", umls: "U" };
const STRIP_METRICS = ["precision", "recall", "f1"] as const;
const MODE_LABELS: Record<string, string> = { lower: "lower", mle: "MLE", optimistic: "optimistic" };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function decisionState(frag: FragmentDoc, heading: string): "accepted" | "rejected" | "undecided" {
  const key = heading.toLowerCase();
  if (frag.accepted.some((h) => h.toLowerCase() === key)) {
    return "accepted";
  }
  if (frag.rejected.some((h) => h.toLowerCase() === key)) {
    return "rejected";
  }
  return "undecided";
}

export function renderBanner(banner: ApiErrorBody): HTMLElement {
  const node = el("div", "banner error");
  node.appendChild(el("span", "message", banner.message));
  if (banner.position !== undefined) {
    node.appendChild(el("span", "position", ` at offset ${String(banner.position)}`));
  }
  if (banner.snippet !== undefined) {
    node.appendChild(el("code", "snippet", banner.snippet));
  }
  return node;
}

function renderCard(
  frag: FragmentDoc,
  heading: string,
  suggestion: Suggestion | null,
  badges: string[],
  handlers: Handlers,
): HTMLElement {
  const card = el("li", suggestion ? "card" : "card manual");
  card.dataset["heading"] = heading;
  card.classList.add(decisionState(frag, heading));
  if (suggestion?.below_cutoff) {
    card.classList.add("dimmed");
  }
  card.appendChild(el("span", "heading", heading));
  const badgeBox = el("span", "badges");
  for (const method of badges) {
    badgeBox.appendChild(el("span", `badge badge-${method}`, METHOD_LETTERS[method] ?? method));
  }
  card.appendChild(badgeBox);
  if (suggestion) {
    card.appendChild(el("span", "score", String(suggestion.norm_score)));
    card.title = suggestion.sources.map(([clause, raw]) => `${clause}: ${String(raw)}`).join(", ");
  }
  if (!frag.passthrough) {
    const controls = el("span", "controls");
    for (const action of ["accept", "reject", "reset"] as const) {
      const button = el("button", action, action);
      button.type = "button";
      button.dataset["action"] = action;
      button.addEventListener("click", () => handlers.onDecide(frag.fragment_id, heading, action));
      controls.appendChild(button);
    }
    card.appendChild(controls);
  }
  return card;
}

export function renderPanel(frag: FragmentDoc, badgeMap: BadgeMap, handlers: Handlers): HTMLElement {
  const panel = el("section", "panel");
  panel.dataset["fragmentId"] = frag.fragment_id;
  const head = el("h3");
  head.appendChild(el("code", "fragment-id", frag.fragment_id));
  if (frag.passthrough) {
    head.appendChild(el("span", "chip readonly", "read-only"));
  }
  panel.appendChild(head);
  const queryLine = el("div", "fragment-query");
  queryLine.appendChild(el("code", undefined, frag.fragment_query));
  panel.appendChild(queryLine);
  if (frag.suggestion_error !== null) {
    panel.appendChild(el("div", "note suggestion-error", frag.suggestion_error));
  }

  const fragBadges = badgeMap.get(frag.fragment_id);
  const cards = el("ol", "cards");
  frag.suggestions.forEach((s, i) => {
    if (i === frag.cutoff) {
      cards.appendChild(el("li", "cutoff-marker", "cutoff"));
    }
    cards.appendChild(renderCard(frag, s.heading, s, fragBadges?.get(s.heading.toLowerCase()) ?? [], handlers));
  });
  const suggested = new Set(frag.suggestions.map((s) => s.heading.toLowerCase()));
  for (const heading of [...frag.accepted, ...frag.rejected]) {
    if (!suggested.has(heading.toLowerCase())) {
      cards.appendChild(renderCard(frag, heading, null, [], handlers));
    }
  }
  panel.appendChild(cards);

  if (!frag.passthrough) {
    const row = el("div", "manual-add");
    const input = el("input");
    input.type = "text";
    input.placeholder = "add a heading";
    const button = el("button", "manual-accept", "accept heading");
    button.type = "button";
    button.addEventListener("click", () => {
      if (input.value.trim()) {
        handlers.onDecide(frag.fragment_id, input.value.trim(), "accept");
        input.value = "";
      }
    });
    row.appendChild(input);
    row.appendChild(button);
    panel.appendChild(row);
  }
  return panel;
}

export function renderStrip(last: LastRetrieval | null): HTMLElement {
  const strip = el("div", "metrics-strip");
  if (last === null) {
    strip.appendChild(el("p", "note", "retrieval not run"));
    return strip;
  }
  const summary = el("div", "retrieval-summary");
  summary.appendChild(el("span", "label", "retrieved"));
  summary.appendChild(el("span", "retrieved", String(last.retrieved)));
  strip.appendChild(summary);
  strip.appendChild(el("code", "retrieval-query", last.query));
  if (last.counts) {
    const counts = el("div", "counts");
    for (const [key, label] of [
      ["judged_relevant_retrieved", "judged relevant"],
      ["judged_irrelevant_retrieved", "judged irrelevant"],
      ["unjudged_retrieved", "unjudged"],
    ] as const) {
      const cell = el("span", `count ${key}`);
      cell.appendChild(el("span", "label", label));
      cell.appendChild(el("span", "value", String(last.counts[key])));
      counts.appendChild(cell);
    }
    strip.appendChild(counts);
  }
  if (last.mle_fallback) {
    strip.appendChild(el("p", "note mle-fallback", "no judged documents retrieved; MLE fell back to the lower bound"));
  }
  if (!last.metrics) {
    strip.appendChild(el("p", "note counts-only", "counts only (no relevance judgments for this session)"));
    return strip;
  }
  const table = el("table", "metrics");
  const head = el("tr");
  head.appendChild(el("th"));
  for (const mode of RESIDUAL_MODES) {
    head.appendChild(el("th", undefined, MODE_LABELS[mode]));
  }
  table.appendChild(head);
  for (const metric of STRIP_METRICS) {
    const row = el("tr");
    row.appendChild(el("th", undefined, metric === "precision" ? "P" : metric === "recall" ? "R" : "F1"));
    for (const mode of RESIDUAL_MODES) {
      const cell = el("td");
      cell.dataset["mode"] = mode;
      cell.dataset["metric"] = metric;
      cell.textContent = String(last.metrics[mode][metric]);
      row.appendChild(cell);
    }
    table.appendChild(row);
  }
  strip.appendChild(table);
  return strip;
}

function renderPreview(session: SessionDoc, handlers: Handlers): HTMLElement {
  const box = el("div", "preview");
  box.appendChild(el("h2", undefined, "Rebuilt query"));
  if (session.preview_error !== null) {
    box.appendChild(el("div", "preview-error", session.preview_error.message));
  } else if (session.preview_query !== null) {
    box.appendChild(el("pre", "preview-query", session.preview_query));
  }
  const button = el("button", "retrieve", "retrieve");
  button.type = "button";
  button.disabled = session.preview_error !== null || session.preview_query === null;
  button.addEventListener("click", () => handlers.onRetrieve());
  box.appendChild(button);
  return box;
}

export function renderSession(state: StoreState, handlers: Handlers): HTMLElement {
  const root = el("div", "session");
  const session = state.session;
  if (session === null) {
    root.appendChild(el("p", "placeholder", state.busy ? "loading" : "no session loaded"));
    return root;
  }
  const head = el("div", "session-head");
  head.appendChild(el("span", "topic", session.topic_id ?? "ad-hoc query"));
  head.appendChild(el("span", "method", session.method));
  head.appendChild(el("code", "original-query", session.query));
  root.appendChild(head);
  for (const frag of session.fragments) {
    root.appendChild(renderPanel(frag, state.badges, handlers));
  }
  root.appendChild(renderPreview(session, handlers));
  root.appendChild(renderStrip(session.last_retrieval));
  return root;
}

export function renderApp(state: StoreState, handlers: Handlers): HTMLElement {
  const app = el("div", "review-app");
  if (state.banner !== null) {
    app.appendChild(renderBanner(state.banner));
  }
  app.appendChild(renderSession(state, handlers));
  return app;
}
