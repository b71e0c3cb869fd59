/**
 * Viewmodel -> HTML string rendering. Pure functions over the viewmodel, so
 * identical payloads always yield identical markup (snapshot-testable) and
 * the renderer needs no browser to test.
 */

import type { GraphView, OptionView, PhaseView, TrialView } from "./viewmodel.js";

const esc = (text: string): string =>
  text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");

const NODE_RADIUS = 22;

function nodeShape(kind: string, x: number, y: number, highlighted: boolean): string {
  const cls = `node node-${kind}${highlighted ? " node-highlighted" : ""}`;
  if (kind === "gate") {
    const half = NODE_RADIUS;
    return `<rect class="${cls}" x="${x - half}" y="${y - half}" width="${2 * half}" height="${2 * half}" rx="6"></rect>`;
  }
  return `<circle class="${cls}" cx="${x}" cy="${y}" r="${NODE_RADIUS}"></circle>`;
}

export function renderGraphSvg(view: GraphView): string {
  const pos = new Map(view.nodes.map((n) => [n.id, n]));
  const parts: string[] = [
    `<svg class="diagram theme-${view.theme}" viewBox="0 0 ${view.width} ${view.height}" role="img">`,
  ];
  for (const edge of view.edges) {
    const a = pos.get(edge.from);
    const b = pos.get(edge.to);
    if (!a || !b) continue;
    parts.push(
      `<line class="edge" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" marker-end="url(#arrow)"></line>`
    );
  }
  for (const node of view.nodes) {
    parts.push(`<g class="node-group" data-node="${esc(node.id)}">`);
    parts.push(nodeShape(node.kind, node.x, node.y, node.highlighted));
    parts.push(
      `<text class="node-name" x="${node.x}" y="${node.y + 5}" text-anchor="middle">${esc(node.name)}</text>`
    );
    if (node.testLabel) {
      parts.push(
        `<text class="test-label" x="${node.x}" y="${node.y + NODE_RADIUS + 16}" text-anchor="middle">${esc(node.testLabel)}</text>`
      );
    }
    parts.push(`<title>${esc(node.roleName)} ${esc(node.name)}</title></g>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

function renderOptions(options: OptionView[], name: string, multiple = false): string {
  const type = multiple ? "checkbox" : "radio";
  const items = options
    .map(
      (o) =>
        `<label class="option${o.isEscape ? " option-escape" : ""}">` +
        `<input type="${type}" name="${esc(name)}" value="${esc(o.value)}">` +
        `${esc(o.label)}</label>`
    )
    .join("");
  return `<fieldset class="options">${items}</fieldset>`;
}

function explanationPanel(text: string | null): string {
  if (text === null) return "";
  return `<aside class="explanation-panel"><h3>Explanation</h3><p>${esc(text)}</p></aside>`;
}

export function renderPhase(view: PhaseView): string {
  const parts: string[] = [
    `<section class="phase phase-${view.phase}">`,
    `<h2>Learning phase ${view.phase}</h2>`,
    `<p class="task-text">${esc(view.taskText)}</p>`,
  ];
  view.graphs.forEach((g) => parts.push(renderGraphSvg(g)));

  if (view.kind === "multiple_choice") {
    parts.push(renderOptions(view.options, "phase1", true));
  } else if (view.kind === "per_gate_choice" && view.perGateChoices) {
    view.gates.forEach((gates, problem) => {
      const rows = gates
        .map((gate) => {
          const cells = view.perGateChoices!
            .map(
              (choice) =>
                `<label><input type="radio" name="p${problem}-g${esc(gate)}" ` +
                `value="${esc(choice)}">${esc(choice.replace(/_/g, " "))}</label>`
            )
            .join("");
          return `<tr><th>gate ${esc(gate)}</th><td>${cells}</td></tr>`;
        })
        .join("");
      parts.push(`<table class="gate-choices" data-problem="${problem}">${rows}</table>`);
    });
  } else if (view.kind === "single_choice") {
    for (const trace of view.traces) {
      const steps = trace.steps
        .map((s) => {
          const sizes =
            s.sizes === null
              ? ""
              : `<span class="split-sizes">(${s.sizes[0]} | ${s.sizes[1]})</span>`;
          return `<li>test ${esc(s.test)} ${sizes}</li>`;
        })
        .join("");
      parts.push(
        `<div class="trace" data-option="${esc(trace.option)}"><h3>${esc(trace.option)}</h3><ol>${steps}</ol></div>`
      );
    }
    parts.push(renderOptions(view.options, "phase3"));
  }

  parts.push(explanationPanel(view.explanation));
  parts.push(`<button class="submit" data-action="submit-phase">Submit</button>`);
  parts.push("</section>");
  return parts.join("");
}

export function renderTrial(view: TrialView): string {
  return [
    `<section class="trial trial-${view.domain}" data-item="${esc(view.itemId)}">`,
    `<header><span class="progress">${esc(view.position)}</span>` +
      `<span class="domain">${esc(view.domain)}</span></header>`,
    renderGraphSvg(view.graph),
    renderOptions(view.options, "trial"),
    `<button class="submit" data-action="submit-trial">Submit</button>`,
    "</section>",
  ].join("");
}

export function renderSummary(meanScore: number | null, excluded: number): string {
  const score = meanScore === null ? "—" : meanScore.toFixed(3);
  return (
    `<section class="summary"><h2>Session complete</h2>` +
    `<p>Mean normalized score: <strong>${score}</strong></p>` +
    `<p>Excluded responses: ${excluded}</p></section>`
  );
}

export function renderError(message: string): string {
  return `<section class="error-view"><h2>Something went wrong</h2><p>${esc(message)}</p></section>`;
}
