import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, StudioApi } from "../src/api";

interface Call {
  url: string;
  method: string;
  body: unknown;
}

function fakeFetch(status: number, payload: unknown) {
  const calls: Call[] = [];
  const fn = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
    calls.push({
      url: String(url),
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : null,
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  });
  vi.stubGlobal("fetch", fn);
  return calls;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("StudioApi", () => {
  it("records a step against the right endpoint", async () => {
    const calls = fakeFetch(200, { tree: { tag: "div", attrs: [], children: [] } });
    const api = new StudioApi("http://test");
    const step = { action: { kind: "click" as const, path: [1] }, edits: [] };
    await api.recordStep("s1", "t1", step);
    expect(calls[0].url).toBe("http://test/sessions/s1/timelines/t1/steps");
    expect(calls[0].method).toBe("POST");
    expect(calls[0].body).toEqual(step);
  });

  it("creates timelines with an optional client name", async () => {
    const calls = fakeFetch(200, { timelineId: "counter-a" });
    const api = new StudioApi("");
    await api.createTimeline("s1", "counter-a");
    expect(calls[0].body).toEqual({ id: "counter-a" });
  });

  it("synthesize defaults the llm mode to off", async () => {
    const calls = fakeFetch(200, { component: {}, report: {} });
    const api = new StudioApi("");
    await api.synthesize("s1");
    expect(calls[0].body).toEqual({ llm: "off" });
  });

  it("surfaces structured error details", async () => {
    fakeFetch(409, { detail: { message: "sketch is locked; unlock to edit" } });
    const api = new StudioApi("");
    await expect(api.putSketch("s1", "<div />")).rejects.toThrowError(ApiError);
    try {
      await api.putSketch("s1", "<div />");
    } catch (error) {
      const apiError = error as ApiError;
      expect(apiError.status).toBe(409);
      expect(apiError.detail.message).toContain("locked");
    }
  });
});
