// Thin typed client for the demosynth session API. Every mutation returns
// the server's view; the studio never derives trees locally.

import type {
  ApiErrorDetail,
  SessionState,
  Step,
  SynthesizeResponse,
  TreeElement,
} from "./types";

export class ApiError extends Error {
  readonly status: number;
  readonly detail: ApiErrorDetail;

  constructor(status: number, detail: ApiErrorDetail) {
    super(`${status}: ${detail.message}`);
    this.status = status;
    this.detail = detail;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let detail: ApiErrorDetail = { message: response.statusText };
    try {
      const body = (await response.json()) as { detail?: ApiErrorDetail | string };
      if (typeof body.detail === "string") detail = { message: body.detail };
      else if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class StudioApi {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  createSession(): Promise<{ id: string }> {
    return request(this.url("/sessions"), { method: "POST" });
  }

  getSession(id: string): Promise<SessionState> {
    return request(this.url(`/sessions/${id}`));
  }

  putSketch(id: string, source: string): Promise<{ tree: TreeElement }> {
    return request(this.url(`/sessions/${id}/sketch`), {
      method: "PUT",
      body: JSON.stringify({ source }),
    });
  }

  lock(id: string): Promise<{ lockState: string }> {
    return request(this.url(`/sessions/${id}/lock`), { method: "POST" });
  }

  unlock(id: string): Promise<{ lockState: string }> {
    return request(this.url(`/sessions/${id}/unlock`), { method: "POST" });
  }

  createTimeline(id: string, timelineId?: string): Promise<{ timelineId: string }> {
    return request(this.url(`/sessions/${id}/timelines`), {
      method: "POST",
      body: JSON.stringify(timelineId ? { id: timelineId } : {}),
    });
  }

  recordStep(id: string, timelineId: string, step: Step): Promise<{ tree: TreeElement }> {
    return request(this.url(`/sessions/${id}/timelines/${timelineId}/steps`), {
      method: "POST",
      body: JSON.stringify(step),
    });
  }

  amendLastStep(id: string, timelineId: string): Promise<{ tree: TreeElement }> {
    return request(this.url(`/sessions/${id}/timelines/${timelineId}/steps/last`), {
      method: "DELETE",
    });
  }

  synthesize(
    id: string,
    options: { llm?: "off" | "mock" | "http"; maxSize?: number; componentName?: string } = {},
  ): Promise<SynthesizeResponse> {
    return request(this.url(`/sessions/${id}/synthesize`), {
      method: "POST",
      body: JSON.stringify({ ...options, llm: options.llm ?? "off" }),
    });
  }
}
