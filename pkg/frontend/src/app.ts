/**
 * Browser flow controller: intro -> three learning phases -> 15 trials ->
 * summary. All evaluation comes from the service; this file only collects
 * form input, posts it, and renders whatever comes back. A failed submission
 * keeps the selection on screen behind a retry button.
 */

import { ApiError, StudyApi } from "./api.js";
import {
  renderError,
  renderPhase,
  renderSummary,
  renderTrial,
} from "./render.js";
import { toPhaseView, toTrialView } from "./viewmodel.js";
import type { PhasePayloadT, TrialPayloadT } from "./schema.js";

type Stage =
  | { at: "phase"; payload: PhasePayloadT }
  | { at: "trial"; payload: TrialPayloadT }
  | { at: "done" };

export class App {
  private sessionId = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly api: StudyApi = new StudyApi()
  ) {}

  async start(participant: string): Promise<void> {
    try {
      const session = await this.api.createSession(participant);
      this.sessionId = session.session_id;
      await this.advance();
    } catch (error) {
      this.fail(error);
    }
  }

  /** Ask the service what comes next; phase 409s mean trials have begun. */
  private async advance(): Promise<void> {
    try {
      const payload = await this.api.phaseContent(this.sessionId);
      this.show({ at: "phase", payload });
      return;
    } catch (error) {
      if (!(error instanceof ApiError) || error.status !== 409) {
        this.fail(error);
        return;
      }
    }
    try {
      const payload = await this.api.trialContent(this.sessionId);
      this.show({ at: "trial", payload });
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        await this.finish();
      } else {
        this.fail(error);
      }
    }
  }

  private show(stage: Stage): void {
    if (stage.at === "phase") {
      this.root.innerHTML = renderPhase(toPhaseView(stage.payload));
      this.bindSubmit(() => this.submitPhase(stage.payload));
    } else if (stage.at === "trial") {
      this.root.innerHTML = renderTrial(toTrialView(stage.payload));
      this.bindSubmit(() => this.submitTrial(stage.payload));
    }
  }

  private bindSubmit(handler: () => Promise<void>): void {
    const button = this.root.querySelector<HTMLButtonElement>("button.submit");
    button?.addEventListener("click", () => {
      button.disabled = true;
      handler().finally(() => {
        button.disabled = false;
      });
    });
  }

  private collectPhaseAnswer(payload: PhasePayloadT): unknown {
    if (payload.phase === 1) {
      const checked = this.root.querySelectorAll<HTMLInputElement>(
        "input[name=phase1]:checked"
      );
      return { selections: Array.from(checked, (i) => i.value) };
    }
    if (payload.phase === 2) {
      return {
        problems: payload.problems.map((problem, index) => {
          const answers: Record<string, string> = {};
          for (const gate of problem.gates) {
            const pick = this.root.querySelector<HTMLInputElement>(
              `input[name="p${index}-g${gate}"]:checked`
            );
            if (pick) answers[gate] = pick.value;
          }
          return answers;
        }),
      };
    }
    const pick = this.root.querySelector<HTMLInputElement>(
      "input[name=phase3]:checked"
    );
    return { choice: pick?.value ?? null };
  }

  private async submitPhase(payload: PhasePayloadT): Promise<void> {
    try {
      const feedback = await this.api.submitPhase(
        this.sessionId,
        payload.phase,
        this.collectPhaseAnswer(payload)
      );
      const banner = document.createElement("p");
      banner.className = feedback.correct ? "feedback-ok" : "feedback-bad";
      banner.textContent = feedback.correct ? "Correct!" : "Not quite — study the feedback.";
      this.root.prepend(banner);
      await this.advance();
    } catch (error) {
      this.retryable(error, () => this.submitPhase(payload));
    }
  }

  private async submitTrial(payload: TrialPayloadT): Promise<void> {
    const pick = this.root.querySelector<HTMLInputElement>(
      "input[name=trial]:checked"
    );
    if (!pick) return;
    if (
      pick.value === payload.escape_option &&
      !window.confirm("Skip this item? It will not count toward your score.")
    ) {
      return;
    }
    try {
      const feedback = await this.api.submitTrial(
        this.sessionId,
        payload.item_id,
        pick.value
      );
      if (feedback.done) {
        await this.finish();
      } else {
        await this.advance();
      }
    } catch (error) {
      this.retryable(error, () => this.submitTrial(payload));
    }
  }

  private async finish(): Promise<void> {
    try {
      const report = await this.api.finalize(this.sessionId);
      this.root.innerHTML = renderSummary(report.mean_score, report.excluded_count);
    } catch (error) {
      this.fail(error);
    }
  }

  /** Transport failure: keep the current view (and selection) and offer retry. */
  private retryable(error: unknown, again: () => Promise<void>): void {
    if (this.root.querySelector(".retry")) return;
    const note = document.createElement("div");
    note.className = "retry";
    note.textContent = `Submission failed: ${String(
      error instanceof Error ? error.message : error
    )} `;
    const button = document.createElement("button");
    button.textContent = "Retry";
    button.addEventListener("click", () => {
      note.remove();
      void again();
    });
    note.append(button);
    this.root.prepend(note);
  }

  private fail(error: unknown): void {
    this.root.innerHTML = renderError(
      error instanceof Error ? error.message : String(error)
    );
  }
}

declare global {
  interface Window {
    faultdxApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const root = document.getElementById("app") as HTMLElement;
  const app = new App(root);
  window.faultdxApp = app;
  const participant =
    new URLSearchParams(window.location.search).get("participant") ??
    `anon-${Date.now()}`;
  void app.start(participant);
}
