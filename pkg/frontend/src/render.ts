// Pure HTML renderers, one per screen. Keeping these as string functions
// makes the layout assertions testable without a browser DOM.

import { LabelingTask } from "./api.js";
import { SessionState } from "./session.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderProgress(labeled: number, total: number): string {
  const pct = total > 0 ? Math.round((100 * labeled) / total) : 0;
  return `
  <div class="progress" role="progressbar" aria-valuenow="${pct}">
    <div class="progress-fill" style="width: ${pct}%"></div>
    <span class="progress-text">${labeled} / ${total} labeled</span>
  </div>`;
}

export function renderPrecision(precision: number | null, threshold: number): string {
  const value = precision === null ? "&mdash;" : precision.toFixed(3);
  return `<div class="precision">precision @ ${threshold}: <strong>${value}</strong></div>`;
}

export function renderBanner(message: string | null, retryable = false): string {
  if (!message) return "";
  const retry = retryable ? '<button id="retry" class="retry">Retry</button>' : "";
  return `<div class="banner" role="alert">${escapeHtml(message)}${retry}</div>`;
}

export function renderTask(task: LabelingTask, state: SessionState): string {
  const disabled = state.phase === "submitting" ? " disabled" : "";
  const authors = task.author_names.map(escapeHtml).join(", ");
  const blocks = task.excerpt
    .map((para) => `<div class="block">${escapeHtml(para)}</div>`)
    .join("\n");
  return `
  ${renderBanner(state.banner)}
  ${renderProgress(state.labeled, state.total)}
  ${renderPrecision(state.precision, state.threshold)}
  <div class="split">
    <aside class="work-panel">
      <h2>${escapeHtml(task.work_title)}</h2>
      <p class="authors">${authors}</p>
      <div class="actions">
        <button id="label-yes" data-label="yes"${disabled}>Yes <kbd>y</kbd></button>
        <button id="label-no" data-label="no"${disabled}>No <kbd>n</kbd></button>
        <button id="label-unknown" data-label="unknown"${disabled}>I don't know <kbd>u</kbd></button>
      </div>
    </aside>
    <section class="excerpt" aria-label="excerpt">
${blocks}
    </section>
  </div>`;
}

export function renderDone(state: SessionState): string {
  return `
  ${renderProgress(state.labeled, state.total)}
  ${renderPrecision(state.precision, state.threshold)}
  <div class="done">
    <h2>Evaluation complete</h2>
    <p>Every sampled candidate has received at least one label. Thank you!</p>
  </div>`;
}

export function renderLoading(): string {
  return `<div class="loading">Fetching the next candidate&hellip;</div>`;
}

export function renderError(state: SessionState): string {
  return renderBanner(state.banner ?? "Something went wrong", true);
}

export function renderApp(state: SessionState): string {
  switch (state.phase) {
    case "loading":
      return renderLoading();
    case "done":
      return renderDone(state);
    case "error":
      return renderError(state);
    case "task":
    case "submitting":
      return state.task ? renderTask(state.task, state) : renderLoading();
  }
}
