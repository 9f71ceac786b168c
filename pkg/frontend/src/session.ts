// Session state machine for one evaluator.
//
// Guarantees: at most one label POST in flight; a user action while a
// submission is pending is ignored (no double POST); a failed submission
// keeps the task on screen with an error banner and rolls back the
// optimistic progress increment. No path drops a label silently: every
// submit either reaches the service or surfaces in the banner.

import { ApiClient, HttpError, LabelValue, LabelingTask, StatsPayload } from "./api.js";

export type Phase = "loading" | "task" | "submitting" | "done" | "error";

export interface SessionState {
  phase: Phase;
  task: LabelingTask | null;
  banner: string | null;
  labeled: number;
  total: number;
  precision: number | null;
  threshold: number;
}

export type Listener = (state: SessionState) => void;

export class LabelingSession {
  private state: SessionState = {
    phase: "loading",
    task: null,
    banner: null,
    labeled: 0,
    total: 0,
    precision: null,
    threshold: 80,
  };
  private inFlight = false;
  private listeners: Listener[] = [];

  constructor(
    private readonly client: ApiClient,
    private readonly evaluatorId: string,
  ) {}

  getState(): SessionState {
    return { ...this.state };
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.getState());
  }

  async start(): Promise<void> {
    this.update({ phase: "loading", banner: null });
    try {
      await this.refreshStats();
      await this.advance();
    } catch (err) {
      this.update({ phase: "error", banner: describe(err) });
    }
  }

  /** Re-fetch after a connection failure; the retry banner calls this. */
  async retry(): Promise<void> {
    await this.start();
  }

  async submitLabel(label: LabelValue): Promise<void> {
    if (this.state.phase !== "task" || this.inFlight || !this.state.task) {
      return; // button disabled or double-fire: exactly one POST per action
    }
    const task = this.state.task;
    this.inFlight = true;
    this.update({
      phase: "submitting",
      banner: null,
      labeled: this.state.labeled + 1, // optimistic; rolled back on failure
    });
    try {
      await this.client.submitLabel(task, label, this.evaluatorId);
    } catch (err) {
      this.inFlight = false;
      this.update({
        phase: "task",
        task,
        labeled: this.state.labeled - 1,
        banner: describe(err),
      });
      return;
    }
    this.inFlight = false;
    try {
      await this.refreshStats();
      await this.advance();
    } catch (err) {
      this.update({ phase: "error", banner: describe(err) });
    }
  }

  private async advance(): Promise<void> {
    const task = await this.client.nextTask();
    if (task === null) {
      this.update({ phase: "done", task: null });
    } else {
      this.update({ phase: "task", task });
    }
  }

  private async refreshStats(): Promise<void> {
    const stats: StatsPayload = await this.client.stats();
    this.update({
      labeled: stats.labeled,
      total: stats.total_tasks,
      precision: stats.precision_at_threshold,
      threshold: stats.operating_threshold,
    });
  }
}

function describe(err: unknown): string {
  if (err instanceof HttpError) {
    if (err.status === 404) return `Candidate not in the plan (404): ${err.message}`;
    if (err.status === 422) return `Label rejected (422): ${err.message}`;
    return `Service error (${err.status}): ${err.message}`;
  }
  return `Connection failed: ${err instanceof Error ? err.message : String(err)}`;
}
