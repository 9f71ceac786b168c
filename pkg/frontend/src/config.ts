// Service base URL resolution: ?api= query parameter wins, then a global
// set by the hosting page, then the local default.

declare global {
  interface Window {
    MAJINLINK_API_BASE?: string;
  }
}

export const DEFAULT_API_BASE = "http://127.0.0.1:8765";

export function resolveApiBase(search = window.location.search): string {
  const fromQuery = new URLSearchParams(search).get("api");
  if (fromQuery) return fromQuery.replace(/\/$/, "");
  if (window.MAJINLINK_API_BASE) return window.MAJINLINK_API_BASE.replace(/\/$/, "");
  return DEFAULT_API_BASE;
}

export function resolveEvaluatorId(search = window.location.search): string {
  const fromQuery = new URLSearchParams(search).get("evaluator");
  if (fromQuery) return fromQuery;
  const stored = window.localStorage.getItem("majinlink.evaluator");
  if (stored) return stored;
  const generated = `evaluator-${Math.random().toString(36).slice(2, 8)}`;
  window.localStorage.setItem("majinlink.evaluator", generated);
  return generated;
}
