// Shared test scaffolding: canned tasks and a scriptable fetch double.

import { LabelingTask } from "../src/api.js";

export function makeTask(i: number, paragraphs = 3): LabelingTask {
  return {
    cluster_id: `c${i}`,
    work_id: `w${i}`,
    work_title: `Work ${i}`,
    author_names: ["First Author", "Second Author"],
    title_score: 50 + i,
    bin: 3,
    excerpt_item_id: `item${i}`,
    excerpt: Array.from({ length: paragraphs }, (_, j) => `paragraph ${j} of task ${i}`),
  };
}

export function jsonResponse(status: number, body: unknown): Response {
  if (status === 204) return new Response(null, { status });
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export interface FetchCall {
  url: string;
  method: string;
  body: unknown;
}

/** Fetch double driven by a handler; records every call it serves. */
export function scriptedFetch(
  handler: (call: FetchCall) => Response | Promise<Response>,
): { fetchFn: typeof fetch; calls: FetchCall[] } {
  const calls: FetchCall[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const call: FetchCall = {
      url: String(input),
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    };
    calls.push(call);
    return handler(call);
  }) as typeof fetch;
  return { fetchFn, calls };
}

export function statsBody(labeled: number, total: number, precision: number | null = null) {
  return {
    total_tasks: total,
    labeled,
    complete: labeled === total,
    per_bin: {},
    operating_threshold: 80,
    n_conclusive: labeled,
    n_unknown: 0,
    precision_at_threshold: precision,
    recall_at_threshold: precision,
  };
}
