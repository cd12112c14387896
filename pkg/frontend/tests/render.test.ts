import { describe, expect, it } from "vitest";
import { renderPanel, renderStrip, type Handlers } from "../src/render.js";
import type { BadgeMap } from "../src/store.js";
import type { FragmentDoc, LastRetrieval, Suggestion } from "../src/types.js";

const noop: Handlers = { onDecide: () => {}, onRetrieve: () => {} };

function suggestion(heading: string, norm: number, below: boolean): Suggestion {
  return {
    heading,
    method: "fusion",
    raw_score: norm * 2,
    norm_score: norm,
    sources: [["clause", 1.0]],
    below_cutoff: below,
  };
}

function fragmentDoc(overrides: Partial<FragmentDoc>): FragmentDoc {
  return {
    fragment_id: "T9:1",
    passthrough: false,
    gold_mesh: ["Something"],
    fragment_query: "(alpha OR beta)",
    stripped_query: "(alpha OR beta)",
    suggestions: [],
    cutoff: 0,
    suggestion_error: null,
    accepted: [],
    rejected: [],
    ...overrides,
  };
}

describe("panel rendering", () => {
  it("places the cutoff marker at the server's cutoff and dims what follows", () => {
    const frag = fragmentDoc({
      suggestions: [
        suggestion("one", 1.0, false),
        suggestion("two", 0.8, false),
        suggestion("three", 0.1, true),
      ],
      cutoff: 2,
    });
    const panel = renderPanel(frag, new Map(), noop);
    const items = [...panel.querySelectorAll(".cards > li")];
    expect(items.map((n) => n.className.split(" ")[0])).toEqual([
      "card", "card", "cutoff-marker", "card",
    ]);
    expect(items[3]!.classList.contains("dimmed")).toBe(true);
    expect(items[3]!.querySelectorAll("button").length).toBe(3);
  });

  it("omits the marker when nothing falls below the cutoff", () => {
    const frag = fragmentDoc({
      suggestions: [suggestion("one", 1.0, false)],
      cutoff: 1,
    });
    const panel = renderPanel(frag, new Map(), noop);
    expect(panel.querySelector(".cutoff-marker")).toBeNull();
  });

  it("shows method badges recorded for a heading", () => {
    const badges: BadgeMap = new Map([
      ["T9:1", new Map([["one", ["atm", "umls"]]])],
    ]);
    const frag = fragmentDoc({ suggestions: [suggestion("one", 1.0, false)] });
    const panel = renderPanel(frag, badges, noop);
    const letters = [...panel.querySelectorAll(".badge")].map((b) => b.textContent);
    expect(letters).toEqual(["A", "U"]);
  });

  it("renders manually decided headings as extra cards", () => {
    const frag = fragmentDoc({
      suggestions: [suggestion("one", 1.0, false)],
      cutoff: 1,
      accepted: ["Handmade Heading"],
      rejected: ["one"],
    });
    const panel = renderPanel(frag, new Map(), noop);
    const manual = panel.querySelector(".card.manual")!;
    expect(manual.querySelector(".heading")!.textContent).toBe("Handmade Heading");
    expect(manual.classList.contains("accepted")).toBe(true);
    expect(panel.querySelector('.card[data-heading="one"]')!.classList.contains("rejected")).toBe(true);
  });

  it("decision state matching is case-insensitive", () => {
    const frag = fragmentDoc({
      suggestions: [suggestion("Fatty Liver", 1.0, false)],
      cutoff: 1,
      accepted: ["fatty liver"],
    });
    const panel = renderPanel(frag, new Map(), noop);
    const card = panel.querySelector(".card")!;
    expect(card.classList.contains("accepted")).toBe(true);
    expect(panel.querySelectorAll(".card").length).toBe(1);
  });

  it("surfaces a per-panel suggestion failure as a note", () => {
    const frag = fragmentDoc({ suggestion_error: "fragment T9:1: no replay entry" });
    const panel = renderPanel(frag, new Map(), noop);
    expect(panel.querySelector(".note.suggestion-error")!.textContent)
      .toBe("fragment T9:1: no replay entry");
  });
});

describe("metrics strip rendering", () => {
  it("prints float metrics at full precision, no client-side rounding", () => {
    const last: LastRetrieval = {
      query: "(a OR b)",
      retrieved: 5,
      counts: {
        judged_relevant_retrieved: 3,
        judged_irrelevant_retrieved: 1,
        unjudged_retrieved: 1,
      },
      mle_fallback: false,
      metrics: {
        lower: { precision: 0.6, recall: 0.375, f_half: 0.5357142857142857, f1: 0.4615384615384615, f3: 0.38961038961038963 },
        mle: { precision: 0.75, recall: 0.42857142857142855, f_half: 0.6521739130434782, f1: 0.5454545454545454, f3: 0.4477611940298507 },
        optimistic: { precision: 0.8, recall: 0.4444444444444444, f_half: 0.6896551724137931, f1: 0.5714285714285714, f3: 0.4597701149425287 },
      },
    };
    const strip = renderStrip(last);
    expect(strip.querySelector('td[data-mode="mle"][data-metric="recall"]')!.textContent)
      .toBe("0.42857142857142855");
    expect(strip.querySelector('td[data-mode="lower"][data-metric="f1"]')!.textContent)
      .toBe("0.4615384615384615");
    expect(strip.querySelector(".mle-fallback")).toBeNull();
  });

  it("renders a placeholder before any retrieval", () => {
    const strip = renderStrip(null);
    expect(strip.textContent).toBe("retrieval not run");
  });

  it("notes the MLE fallback when the server flags it", () => {
    const strip = renderStrip({ query: "(a)", retrieved: 0, mle_fallback: true });
    expect(strip.querySelector(".note.mle-fallback")).not.toBeNull();
  });
});
