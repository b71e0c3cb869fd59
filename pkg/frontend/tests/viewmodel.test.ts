import { describe, expect, it } from "vitest";

import { toGraphView, toPhaseView, toTrialView } from "../src/viewmodel.js";
import {
  diamondGraph,
  phase3Machine,
  phase3Self,
  trialPayload,
} from "./fixtures.js";

describe("toTrialView", () => {
  it("shows exactly the payload options plus the escape entry", () => {
    const view = toTrialView(trialPayload);
    expect(view.options.map((o) => o.value)).toEqual([
      "pressure_a",
      "pressure_b",
      "pressure_c",
      "escape",
    ]);
    expect(view.options.filter((o) => o.isEscape)).toHaveLength(1);
  });

  it("applies the domain theme without touching the graph", () => {
    const view = toTrialView(trialPayload);
    expect(view.graph.theme).toBe("water");
    expect(view.graph.nodes.find((n) => n.id === "3")!.roleName).toBe("junction");
    expect(view.graph.edges).toHaveLength(diamondGraph.edges.length);
  });

  it("reports 1-based progress", () => {
    expect(toTrialView(trialPayload).position).toBe("7 / 15");
  });
});

describe("toPhaseView", () => {
  it("carries split sizes only when the payload has them", () => {
    const machine = toPhaseView(phase3Machine);
    const self = toPhaseView(phase3Self);
    expect(machine.traces[0].steps[0].sizes).toEqual([1, 1]);
    expect(self.traces[0].steps[0].sizes).toBeNull();
  });

  it("surfaces the explanation only when present", () => {
    expect(toPhaseView(phase3Machine).explanation).toBe("Pick the evenest split.");
    expect(toPhaseView(phase3Self).explanation).toBeNull();
  });
});

describe("toGraphView highlights", () => {
  it("marks only requested nodes", () => {
    const view = toGraphView(diamondGraph, "circuits", ["1", "3"]);
    const marked = view.nodes.filter((n) => n.highlighted).map((n) => n.id);
    expect(marked).toEqual(["1", "3"]);
  });

  it("marks nothing by default", () => {
    const view = toGraphView(diamondGraph);
    expect(view.nodes.some((n) => n.highlighted)).toBe(false);
  });
});
