// View-state <-> URL round trip and layout determinism.

import { describe, expect, it } from "vitest";

import { assignLayers } from "../src/dfg_view.js";
import { forceLayout } from "../src/sna_view.js";
import { DEFAULT_STATE, formatState, parseState, ViewState } from "../src/state.js";
import { DFG_FIXTURE } from "./helpers.js";

describe("view state", () => {
  it("defaults from an empty query string", () => {
    expect(parseState("")).toEqual(DEFAULT_STATE);
  });

  it("round-trips every field through the query string", () => {
    const states: ViewState[] = [
      { process: "invoice", view: "cases", types: "task",
        from: "2021-05-01T00:00:00Z", to: "", mode: "performance", metric: "handover" },
      { process: "payment", view: "sna", types: "all",
        from: "", to: "2021-06-01T00:00:00Z", mode: "frequency", metric: "similar_activities" },
      { process: "a b/c", view: "dfg", types: "all", from: "", to: "",
        mode: "frequency", metric: "handover" },
    ];
    for (const state of states) {
      expect(parseState(formatState(state))).toEqual(state);
    }
  });

  it("ignores unknown values", () => {
    const state = parseState("?view=bogus&metric=wat&types=nope");
    expect(state.view).toBe("dfg");
    expect(state.metric).toBe("handover");
    expect(state.types).toBe("all");
  });
});

describe("layout determinism", () => {
  it("dfg layering is stable for a fixed payload", () => {
    const first = assignLayers(DFG_FIXTURE);
    const second = assignLayers(DFG_FIXTURE);
    expect(first).toEqual(second);
    expect(first.get("Approve Invoice")).toBe(0);
    expect(first.get("Prepare Bank Transfer")).toBe(1);
  });

  it("force layout is identical across runs", () => {
    const edges: Array<[number, number, number]> = [[0, 1, 3], [1, 2, 1], [2, 0, 2]];
    expect(forceLayout(3, edges)).toEqual(forceLayout(3, edges));
  });
});
