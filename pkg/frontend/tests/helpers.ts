import { ApiClient } from "../src/api.js";
import { SessionStore } from "../src/store.js";
import { init } from "../src/app.js";
import { loadRecording, ReplayFetch, type Recording } from "./replay.js";

export interface Harness {
  recording: Recording;
  replay: ReplayFetch;
  store: SessionStore;
  root: HTMLElement;
}

/** Boot the full app against a recorded backend. */
export function mount(fixtureName: string): Harness {
  const recording = loadRecording(fixtureName);
  const replay = new ReplayFetch(recording);
  const store = new SessionStore(new ApiClient(replay.fetch));
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  init(root, store);
  return { recording, replay, store, root };
}

/** Load a topic through the loader form, like a user would. */
export async function loadTopic(h: Harness, topicId: string): Promise<void> {
  const input = h.root.querySelector<HTMLInputElement>(".topic-input")!;
  input.value = topicId;
  h.root.querySelector<HTMLButtonElement>(".load-topic")!.click();
  await h.store.idle();
}

export async function loadQuery(h: Harness, query: string): Promise<void> {
  const input = h.root.querySelector<HTMLInputElement>(".query-input")!;
  input.value = query;
  h.root.querySelector<HTMLButtonElement>(".load-query")!.click();
  await h.store.idle();
}

/** Click a decision button on a suggestion card. */
export async function clickDecision(
  h: Harness,
  fragmentId: string,
  heading: string,
  action: string,
): Promise<void> {
  const selector =
    `[data-fragment-id="${fragmentId}"] .card[data-heading="${heading}"] button.${action}`;
  const button = h.root.querySelector<HTMLButtonElement>(selector);
  if (!button) {
    throw new Error(`no button for ${selector}`);
  }
  button.click();
  await h.store.idle();
}

export function sessionRegion(root: HTMLElement | ParentNode): HTMLElement {
  return (root.querySelector(".session") as HTMLElement)!;
}
