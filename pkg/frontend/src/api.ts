// Typed client for the annotation service. Every shape here mirrors a JSON
// response field for field; the UI renders these values and nothing else.

export type QuotaProgress = {
  pos_filled: number;
  pos_quota: number;
  neg_filled: number;
  neg_quota: number;
  annotated: number;
  cap: number;
};

export type AnnotationTask = {
  word: string;
  glosses: string[];
  iteration: number;
  strategy: string;
  session_id: string;
  progress: QuotaProgress;
};

export type SessionInfo = {
  session_id: string;
  status: "collecting" | "training" | "finished";
  strategy: string;
  seed: number;
  iteration: number;
  iterations: number;
  progress: QuotaProgress;
  pool_initial: number;
  pool_remaining: number;
  labeled_total: number;
  training_error: string | null;
};

export type ClassScores = {
  precision: number;
  recall: number;
  f1: number;
  degenerate: boolean;
};

export type MetricsRow = {
  iteration: number;
  annotations: number;
  labeled_total: number;
  pos_filled: number;
  neg_filled: number;
  quotas_met: boolean;
  dev_accuracy: number;
  mental: ClassScores | null;
  physical: ClassScores | null;
};

export type MetricsHistory = {
  strategy: string;
  seed: number;
  pool_initial: number;
  pool_remaining: number;
  best_iteration: number | null;
  iterations: MetricsRow[];
};

export type LabelAck = {
  word: string;
  counted: boolean;
  iteration_complete: boolean;
  status: string;
};

export type LabelBody = {
  word: string;
  label: "mental" | "physical";
  note?: string;
  annotator?: string;
};

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx answer from the service, with the Retry-After hint if one came. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly retryAfterSeconds: number | null,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  const retryAfter = res.headers.get("retry-after");
  throw new ApiError(res.status, detail, retryAfter === null ? null : Number(retryAfter));
}

export class LexloopClient {
  constructor(
    readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.base + path, {
      headers: { Accept: "application/json" },
    });
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  getSession(): Promise<SessionInfo> {
    return this.getJson<SessionInfo>("/api/session");
  }

  getNext(): Promise<AnnotationTask> {
    return this.getJson<AnnotationTask>("/api/next");
  }

  getMetrics(): Promise<MetricsHistory> {
    return this.getJson<MetricsHistory>("/api/metrics");
  }

  async postLabel(body: LabelBody): Promise<LabelAck> {
    const res = await this.fetchImpl(this.base + "/api/label", {
      method: "POST",
      headers: { "Content-Type": "application/json", Accept: "application/json" },
      body: JSON.stringify(body),
    });
    await raiseForStatus(res);
    return (await res.json()) as LabelAck;
  }
}
