import { describe, expect, it, vi } from "vitest";
import { renderStrip } from "../src/render.js";
import type { LastRetrieval, RetrieveResponse, SessionExport } from "../src/types.js";
import { clickDecision, loadTopic, mount } from "./helpers.js";

function lastExchange(h: ReturnType<typeof mount>, suffix: string) {
  const matches = h.recording.exchanges.filter((e) => new URL(e.url).pathname.endsWith(suffix));
  expect(matches.length).toBeGreaterThan(0);
  return matches[matches.length - 1]!;
}

describe("reviewing the liver-biopsy fragment", () => {
  async function acceptBoth() {
    const h = mount("decision_loop.json");
    await loadTopic(h, "T1");
    await clickDecision(h, "T1:3", "liver", "accept");
    await clickDecision(h, "T1:3", "biopsy", "accept");
    return h;
  }

  it("renders one panel per fragment with the ranked suggestions", async () => {
    const h = mount("decision_loop.json");
    await loadTopic(h, "T1");
    const panels = h.root.querySelectorAll(".panel");
    expect(panels.length).toBe(3);
    const headings = [...h.root.querySelectorAll('[data-fragment-id="T1:3"] .card .heading')]
      .map((n) => n.textContent);
    const served = h.recording.exchanges[0]!.response as any;
    const f3 = served.fragments.find((f: any) => f.fragment_id === "T1:3");
    expect(headings).toEqual(f3.suggestions.map((s: any) => s.heading));
  });

  it("accepting liver then biopsy rebuilds the preview around both headings", async () => {
    const h = await acceptBoth();
    const preview = h.root.querySelector(".preview-query")!.textContent!;
    expect(preview).toBe((lastExchange(h, "/query").response as any).query);
    expect(preview.replace(/"/g, "")).toContain("(liver[Mesh] OR biopsy[Mesh] OR liver biops*)");
    const cardState = (heading: string) =>
      h.root.querySelector(`[data-fragment-id="T1:3"] .card[data-heading="${heading}"]`)!.classList;
    expect(cardState("liver").contains("accepted")).toBe(true);
    expect(cardState("biopsy").contains("accepted")).toBe(true);
  });

  it("the metrics strip equals the retrieve payload, number for number", async () => {
    const h = await acceptBoth();
    h.root.querySelector<HTMLButtonElement>("button.retrieve")!.click();
    await h.store.idle();

    const payload = lastExchange(h, "/retrieve").response as RetrieveResponse;
    const strip = h.root.querySelector(".metrics-strip")!;
    expect(strip.querySelector(".retrieved")!.textContent).toBe(String(payload.retrieved));
    expect(strip.querySelector(".retrieval-query")!.textContent).toBe(payload.query);
    for (const key of [
      "judged_relevant_retrieved",
      "judged_irrelevant_retrieved",
      "unjudged_retrieved",
    ] as const) {
      expect(strip.querySelector(`.count.${key} .value`)!.textContent)
        .toBe(String(payload.counts![key]));
    }
    for (const mode of ["lower", "mle", "optimistic"] as const) {
      for (const metric of ["precision", "recall", "f1"] as const) {
        const cell = strip.querySelector(`td[data-mode="${mode}"][data-metric="${metric}"]`)!;
        expect(cell.textContent).toBe(String(payload.metrics![mode][metric]));
      }
    }

    const { schema_version: _v, error: _e, ...stored } = payload;
    const expected = renderStrip(stored as LastRetrieval);
    expect(strip.innerHTML).toBe(expected.innerHTML);
  });

  it("export fills the textarea with the server's document", async () => {
    const h = await acceptBoth();
    h.root.querySelector<HTMLButtonElement>("button.export")!.click();
    const box = h.root.querySelector<HTMLTextAreaElement>(".session-json")!;
    await vi.waitFor(() => expect(box.value).not.toBe(""));
    const doc = JSON.parse(box.value) as SessionExport;
    expect(doc).toEqual(lastExchange(h, "/export").response);
    expect(doc.decisions["T1:3"]!.accepted).toEqual(["liver", "biopsy"]);
  });
});
