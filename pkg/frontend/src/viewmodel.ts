/**
 * Pure payload -> viewmodel transformations. No fetching, no DOM: everything
 * here is a function of the API payload alone, which is what makes the
 * rendering snapshot-testable and keeps the UI from inventing content the
 * service never sent.
 */

import type {
  GraphT,
  PhasePayloadT,
  TraceStepT,
  TrialPayloadT,
} from "./schema.js";
import { layoutGraph, type PositionedNode } from "./layout.js";

/** Presentation vocabulary per domain; the graphs are isomorphic. */
export const DOMAIN_THEMES = {
  circuits: { source: "battery", gate: "gate", sink: "lightbulb", theme: "electric" },
  waterflow: { source: "pump", gate: "junction", sink: "outlet", theme: "water" },
  lists: { source: "start", gate: "position", sink: "end", theme: "list" },
} as const;

export type DomainName = keyof typeof DOMAIN_THEMES;

export interface GraphView {
  nodes: (PositionedNode & { highlighted: boolean; roleName: string })[];
  edges: { from: string; to: string }[];
  width: number;
  height: number;
  theme: string;
}

export function toGraphView(
  graph: GraphT,
  domain: DomainName = "circuits",
  highlight: string[] = []
): GraphView {
  const theme = DOMAIN_THEMES[domain];
  const layout = layoutGraph(graph);
  const marked = new Set(highlight);
  return {
    nodes: layout.nodes.map((node) => ({
      ...node,
      highlighted: marked.has(node.id),
      roleName: theme[node.kind],
    })),
    edges: graph.edges.map((e) => ({ from: e.from, to: e.to })),
    width: layout.width,
    height: layout.height,
    theme: theme.theme,
  };
}

export interface OptionView {
  value: string;
  label: string;
  isEscape: boolean;
}

export interface TraceView {
  option: string;
  steps: { test: string; sizes: [number, number] | null }[];
}

export interface PhaseView {
  phase: 1 | 2 | 3;
  kind: string;
  taskText: string;
  explanation: string | null;
  graphs: GraphView[];
  options: OptionView[];
  perGateChoices: string[] | null;
  gates: string[][];
  traces: TraceView[];
}

const traceSteps = (steps: TraceStepT[]) =>
  steps.map((s) => ({ test: s.test, sizes: s.sizes ?? null }));

export function toPhaseView(payload: PhasePayloadT): PhaseView {
  const base = {
    phase: payload.phase,
    kind: payload.kind,
    taskText: payload.task_text,
    explanation: payload.explanation ?? null,
    perGateChoices: null as string[] | null,
    gates: [] as string[][],
    traces: [] as TraceView[],
  };
  switch (payload.phase) {
    case 1:
      return {
        ...base,
        graphs: [toGraphView(payload.graph)],
        options: payload.options.map((value) => ({
          value,
          label: value,
          isEscape: false,
        })),
      };
    case 2:
      return {
        ...base,
        graphs: payload.problems.map((p) => toGraphView(p.graph)),
        options: [],
        perGateChoices: payload.choices,
        gates: payload.problems.map((p) => p.gates),
      };
    case 3:
      return {
        ...base,
        graphs: [toGraphView(payload.graph)],
        options: payload.options.map((value) => ({
          value,
          label: value,
          isEscape: false,
        })),
        traces: payload.options.map((option) => ({
          option,
          steps: traceSteps(payload.traces[option] ?? []),
        })),
      };
  }
}

export interface TrialView {
  itemId: string;
  domain: DomainName;
  position: string; // "3 / 15"
  graph: GraphView;
  options: OptionView[];
  optionTargets: Record<string, string>;
}

export function toTrialView(payload: TrialPayloadT): TrialView {
  const options: OptionView[] = payload.options.map((value) => ({
    value,
    label: value,
    isEscape: false,
  }));
  options.push({
    value: payload.escape_option,
    label: "I don't know",
    isEscape: true,
  });
  return {
    itemId: payload.item_id,
    domain: payload.domain,
    position: `${payload.index + 1} / ${payload.total}`,
    graph: toGraphView(payload.graph, payload.domain),
    options,
    optionTargets: payload.option_targets,
  };
}
