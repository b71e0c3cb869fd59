/**
 * Zod schemas for every API payload the UI consumes. Rendering refuses to
 * degrade silently: anything that fails these parses becomes an error view.
 */

import { z } from "zod";

export const GraphNode = z.object({
  id: z.string(),
  kind: z.enum(["source", "gate", "sink"]),
  name: z.string(),
  test_label: z.string().nullable(),
});

export const GraphEdge = z.object({ from: z.string(), to: z.string() });

export const Graph = z.object({
  nodes: z.array(GraphNode).min(1),
  edges: z.array(GraphEdge),
});

const phaseBase = {
  task_text: z.string(),
  explanation: z.string().optional(),
};

export const Phase1Payload = z.object({
  phase: z.literal(1),
  kind: z.literal("multiple_choice"),
  graph: Graph,
  options: z.array(z.string()).min(1),
  ...phaseBase,
});

export const Phase2Payload = z.object({
  phase: z.literal(2),
  kind: z.literal("per_gate_choice"),
  choices: z.array(z.string()).min(1),
  problems: z.array(
    z.object({
      graph: Graph,
      test: z.string(),
      outcome: z.enum(["lit", "unlit"]),
      gates: z.array(z.string()).min(1),
    })
  ),
  ...phaseBase,
});

export const TraceStep = z.object({
  test: z.string(),
  sizes: z.tuple([z.number(), z.number()]).optional(),
});

export const Phase3Payload = z.object({
  phase: z.literal(3),
  kind: z.literal("single_choice"),
  graph: Graph,
  options: z.array(z.string()).min(2),
  traces: z.record(z.array(TraceStep)),
  ...phaseBase,
});

export const PhasePayload = z.discriminatedUnion("phase", [
  Phase1Payload,
  Phase2Payload,
  Phase3Payload,
]);

export const TrialPayload = z.object({
  item_id: z.string(),
  domain: z.enum(["circuits", "waterflow", "lists"]),
  graph: Graph,
  options: z.array(z.string()).min(1),
  option_targets: z.record(z.string()),
  escape_option: z.string(),
  index: z.number().int().nonnegative(),
  total: z.number().int().positive(),
});

export const PhaseFeedback = z.object({
  phase: z.number().int(),
  correct: z.boolean(),
  next_phase: z.number().int(),
  highlight: z.array(z.string()).optional(),
  explanation: z.string().optional(),
}).passthrough();

export const TrialFeedback = z.object({
  recorded: z.boolean(),
  excluded: z.boolean(),
  normalized_score: z.number().nullable(),
  remaining: z.number().int(),
  done: z.boolean(),
});

export const IntroPayload = z.object({ domain: z.string(), text: z.string() });

export const SessionInfo = z.object({
  session_id: z.string(),
  group: z.enum(["self_learning", "machine_explained"]),
  phase: z.number().int(),
});

export const FinalReport = z.object({
  session_id: z.string(),
  group: z.string(),
  records: z.array(z.object({}).passthrough()),
  mean_score: z.number().nullable(),
  excluded_count: z.number().int(),
});

export type GraphT = z.infer<typeof Graph>;
export type GraphNodeT = z.infer<typeof GraphNode>;
export type PhasePayloadT = z.infer<typeof PhasePayload>;
export type TrialPayloadT = z.infer<typeof TrialPayload>;
export type TraceStepT = z.infer<typeof TraceStep>;
export type SessionInfoT = z.infer<typeof SessionInfo>;
export type FinalReportT = z.infer<typeof FinalReport>;
