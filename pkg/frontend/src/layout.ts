/**
 * Deterministic layered layout for the circuit diagrams: sources in the
 * leftmost column, each node one column right of its deepest parent, sinks
 * pushed to the final column. Rows are ordered by node id, so identical
 * payloads always produce identical coordinates.
 */

import type { GraphT } from "./schema.js";

export interface PositionedNode {
  id: string;
  kind: "source" | "gate" | "sink";
  name: string;
  testLabel: string | null;
  x: number;
  y: number;
}

export interface LayoutResult {
  nodes: PositionedNode[];
  width: number;
  height: number;
}

export const COLUMN_SPACING = 140;
export const ROW_SPACING = 80;
export const MARGIN = 60;

/** Longest-path depth per node; cycles would make the API payload invalid
 * upstream, so the walk assumes a DAG. */
function depths(graph: GraphT): Map<string, number> {
  const parents = new Map<string, string[]>();
  for (const node of graph.nodes) parents.set(node.id, []);
  for (const edge of graph.edges) parents.get(edge.to)?.push(edge.from);

  const depth = new Map<string, number>();
  const visit = (id: string): number => {
    const known = depth.get(id);
    if (known !== undefined) return known;
    const above = (parents.get(id) ?? []).map(visit);
    const d = above.length === 0 ? 0 : Math.max(...above) + 1;
    depth.set(id, d);
    return d;
  };
  for (const node of graph.nodes) visit(node.id);
  return depth;
}

export function layoutGraph(graph: GraphT): LayoutResult {
  const depth = depths(graph);
  let maxDepth = 0;
  for (const d of depth.values()) maxDepth = Math.max(maxDepth, d);

  const column = (id: string, kind: string): number =>
    kind === "sink" ? maxDepth : depth.get(id) ?? 0;

  const byColumn = new Map<number, typeof graph.nodes>();
  const sorted = [...graph.nodes].sort((a, b) => a.id.localeCompare(b.id));
  for (const node of sorted) {
    const col = column(node.id, node.kind);
    const bucket = byColumn.get(col) ?? [];
    bucket.push(node);
    byColumn.set(col, bucket);
  }

  const nodes: PositionedNode[] = [];
  let maxRows = 1;
  for (const [col, bucket] of byColumn) {
    maxRows = Math.max(maxRows, bucket.length);
    bucket.forEach((node, row) => {
      nodes.push({
        id: node.id,
        kind: node.kind,
        name: node.name,
        testLabel: node.test_label,
        x: MARGIN + col * COLUMN_SPACING,
        y: MARGIN + row * ROW_SPACING,
      });
    });
  }
  nodes.sort((a, b) => a.id.localeCompare(b.id));
  return {
    nodes,
    width: 2 * MARGIN + maxDepth * COLUMN_SPACING,
    height: 2 * MARGIN + (maxRows - 1) * ROW_SPACING,
  };
}
