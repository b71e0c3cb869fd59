/**
 * Typed client for the study service. Every response is validated against
 * its schema before anything renders; validation failures surface as
 * ApiError rather than partially drawn views.
 */

import {
  FinalReport,
  IntroPayload,
  PhaseFeedback,
  PhasePayload,
  SessionInfo,
  TrialFeedback,
  TrialPayload,
  type FinalReportT,
  type PhasePayloadT,
  type SessionInfoT,
  type TrialPayloadT,
} from "./schema.js";
import type { z } from "zod";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number | null = null
  ) {
    super(message);
  }
}

async function request<S extends z.ZodTypeAny>(
  url: string,
  schema: S,
  init?: RequestInit
): Promise<z.infer<S>> {
  let response: Response;
  try {
    response = await fetch(url, {
      headers: { "content-type": "application/json" },
      ...init,
    });
  } catch (cause) {
    throw new ApiError(`network failure: ${String(cause)}`);
  }
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const detail =
      body && typeof body.detail === "string" ? body.detail : response.statusText;
    throw new ApiError(detail, response.status);
  }
  const parsed = schema.safeParse(body);
  if (!parsed.success) {
    throw new ApiError(`response failed validation: ${parsed.error.message}`);
  }
  return parsed.data;
}

export class StudyApi {
  constructor(private readonly base: string = "") {}

  createSession(
    participant: string,
    group?: "self_learning" | "machine_explained",
    seed?: number
  ): Promise<SessionInfoT> {
    return request(`${this.base}/sessions`, SessionInfo, {
      method: "POST",
      body: JSON.stringify({ participant, group, seed }),
    });
  }

  intro(domain: string, workedExample = false) {
    const query = workedExample ? "?worked_example=true" : "";
    return request(`${this.base}/intro/${domain}${query}`, IntroPayload);
  }

  phaseContent(sessionId: string): Promise<PhasePayloadT> {
    return request(`${this.base}/sessions/${sessionId}/phase`, PhasePayload);
  }

  submitPhase(sessionId: string, phase: number, answer: unknown) {
    return request(`${this.base}/sessions/${sessionId}/phase`, PhaseFeedback, {
      method: "POST",
      body: JSON.stringify({ phase, answer }),
    });
  }

  trialContent(sessionId: string): Promise<TrialPayloadT> {
    return request(`${this.base}/sessions/${sessionId}/trial`, TrialPayload);
  }

  submitTrial(sessionId: string, itemId: string, choice: string) {
    return request(`${this.base}/sessions/${sessionId}/trial`, TrialFeedback, {
      method: "POST",
      body: JSON.stringify({ item_id: itemId, choice }),
    });
  }

  finalize(sessionId: string): Promise<FinalReportT> {
    return request(`${this.base}/sessions/${sessionId}/finalize`, FinalReport, {
      method: "POST",
    });
  }
}
