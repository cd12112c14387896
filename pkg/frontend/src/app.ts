import { SessionStore } from "./store.js";
import { renderApp, type Handlers } from "./render.js";
import type { SessionExport } from "./types.js";

/** Wire the store to a root element: a loader form, the rendered session,
 * and an export/import area. Every state change re-renders the session
 * region from scratch so the DOM is always a pure projection. */
export function init(root: HTMLElement, store: SessionStore): void {
  const loader = document.createElement("form");
  loader.className = "loader";
  loader.innerHTML = [
    '<input class="topic-input" placeholder="topic id">',
    '<button type="button" class="load-topic">load topic</button>',
    '<input class="query-input" placeholder="or paste a query">',
    '<button type="button" class="load-query">load query</button>',
  ].join("");
  const view = document.createElement("div");
  view.className = "view";
  const exchange = document.createElement("div");
  exchange.className = "export-area";
  exchange.innerHTML = [
    '<button type="button" class="export">export session</button>',
    '<button type="button" class="import">import session</button>',
    '<textarea class="session-json" rows="6" placeholder="session JSON"></textarea>',
  ].join("");
  root.replaceChildren(loader, view, exchange);

  const handlers: Handlers = {
    onDecide: (fragmentId, heading, action) => void store.decide(fragmentId, heading, action),
    onRetrieve: () => void store.retrieve(),
  };
  store.subscribe((state) => {
    view.replaceChildren(renderApp(state, handlers));
  });
  view.replaceChildren(renderApp(store.getState(), handlers));

  const topicInput = loader.querySelector<HTMLInputElement>(".topic-input")!;
  const queryInput = loader.querySelector<HTMLInputElement>(".query-input")!;
  loader.querySelector(".load-topic")!.addEventListener("click", () => {
    if (topicInput.value.trim()) {
      void store.loadSession({ topic_id: topicInput.value.trim() });
    }
  });
  loader.querySelector(".load-query")!.addEventListener("click", () => {
    if (queryInput.value.trim()) {
      void store.loadSession({ query: queryInput.value.trim() });
    }
  });

  const jsonBox = exchange.querySelector<HTMLTextAreaElement>(".session-json")!;
  exchange.querySelector(".export")!.addEventListener("click", () => {
    const session = store.getState().session;
    if (session) {
      void store.api.exportSession(session.session_id).then((doc) => {
        jsonBox.value = JSON.stringify(doc, null, 1);
      });
    }
  });
  exchange.querySelector(".import")!.addEventListener("click", () => {
    if (jsonBox.value.trim()) {
      void store.importSession(JSON.parse(jsonBox.value) as SessionExport);
    }
  });
}
