import type { PhasePayloadT, TrialPayloadT } from "../src/schema.js";

export const chainGraph = {
  nodes: [
    { id: "0", kind: "source" as const, name: "0", test_label: null },
    { id: "1", kind: "gate" as const, name: "1", test_label: "output_a" },
    { id: "2", kind: "gate" as const, name: "2", test_label: "output_b" },
    { id: "lightbulb", kind: "sink" as const, name: "lightbulb", test_label: null },
  ],
  edges: [
    { from: "0", to: "1" },
    { from: "1", to: "2" },
    { from: "2", to: "lightbulb" },
  ],
};

export const diamondGraph = {
  nodes: [
    { id: "0", kind: "source" as const, name: "0", test_label: null },
    { id: "1", kind: "gate" as const, name: "1", test_label: "output_a" },
    { id: "2", kind: "gate" as const, name: "2", test_label: "output_b" },
    { id: "3", kind: "gate" as const, name: "3", test_label: "output_c" },
    { id: "lightbulb", kind: "sink" as const, name: "lightbulb", test_label: null },
  ],
  edges: [
    { from: "0", to: "1" },
    { from: "0", to: "2" },
    { from: "1", to: "3" },
    { from: "2", to: "3" },
    { from: "3", to: "lightbulb" },
  ],
};

export const phase3Self: PhasePayloadT = {
  phase: 3,
  kind: "single_choice",
  task_text: "Compare the two approaches.",
  graph: chainGraph,
  options: ["option_1", "option_2"],
  traces: {
    option_1: [{ test: "output_a" }],
    option_2: [{ test: "output_a" }, { test: "output_b" }],
  },
};

export const phase3Machine: PhasePayloadT = {
  ...phase3Self,
  explanation: "Pick the evenest split.",
  traces: {
    option_1: [{ test: "output_a", sizes: [1, 1] }],
    option_2: [
      { test: "output_a", sizes: [1, 1] },
      { test: "output_b", sizes: [0, 1] },
    ],
  },
};

export const trialPayload: TrialPayloadT = {
  item_id: "water_02",
  domain: "waterflow",
  graph: diamondGraph,
  options: ["pressure_a", "pressure_b", "pressure_c"],
  option_targets: { pressure_a: "1", pressure_b: "2", pressure_c: "3" },
  escape_option: "escape",
  index: 6,
  total: 15,
};
