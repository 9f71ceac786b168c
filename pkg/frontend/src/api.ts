// HTTP client for the evaluation service. All traffic goes through here so
// the session logic and tests can swap the fetch implementation.

export interface LabelingTask {
  cluster_id: string;
  work_id: string;
  work_title: string;
  author_names: string[];
  title_score: number;
  bin: number | null;
  excerpt_item_id: string;
  excerpt: string[];
}

export interface StatsPayload {
  total_tasks: number;
  labeled: number;
  complete: boolean;
  per_bin: Record<string, { total: number; labeled: number }>;
  operating_threshold: number;
  n_conclusive: number;
  n_unknown: number;
  precision_at_threshold: number | null;
  recall_at_threshold: number | null;
}

export type LabelValue = "yes" | "no" | "unknown";

export class HttpError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
    this.name = "HttpError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  /** Next unlabeled task, or null once every sampled item has a label. */
  async nextTask(): Promise<LabelingTask | null> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/tasks/next`);
    if (resp.status === 204) return null;
    if (!resp.ok) throw new HttpError(resp.status, await safeDetail(resp));
    return (await resp.json()) as LabelingTask;
  }

  async submitLabel(
    task: Pick<LabelingTask, "cluster_id" | "work_id">,
    label: LabelValue,
    evaluatorId: string,
  ): Promise<void> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        candidate: { cluster_id: task.cluster_id, work_id: task.work_id },
        label,
        evaluator_id: evaluatorId,
      }),
    });
    if (resp.status !== 201) throw new HttpError(resp.status, await safeDetail(resp));
  }

  async stats(): Promise<StatsPayload> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/stats`);
    if (!resp.ok) throw new HttpError(resp.status, await safeDetail(resp));
    return (await resp.json()) as StatsPayload;
  }
}

async function safeDetail(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return `HTTP ${resp.status}`;
  }
}
