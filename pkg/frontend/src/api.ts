import type { Action, JobView, RunSummaryView, RunView } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Thin typed client over the run service; fetch is injectable for tests. */
export class ApiClient {
  constructor(
    private base: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, (body as { error?: string }).error ?? response.statusText);
    }
    return body as T;
  }

  async listRuns(): Promise<RunSummaryView[]> {
    const body = await this.request<{ runs: RunSummaryView[] }>("/runs");
    return body.runs;
  }

  async getRun(runId: string): Promise<RunView> {
    const body = await this.request<{ run: RunView }>(`/runs/${runId}`);
    return body.run;
  }

  async createRun(narrative: unknown, config: Record<string, unknown> = {}): Promise<RunView> {
    const body = await this.request<{ run: RunView }>("/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ narrative, config }),
    });
    return body.run;
  }

  async postAction(runId: string, action: Action): Promise<{ job_id: string }> {
    return this.request<{ job_id: string }>(`/runs/${runId}/actions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ action }),
    });
  }

  async getJob(runId: string, jobId: string): Promise<JobView> {
    const body = await this.request<{ job: JobView }>(`/runs/${runId}/jobs/${jobId}`);
    return body.job;
  }

  exportUrl(runId: string, kind: "score_json" | "graph_json" | "text_summary"): string {
    return `${this.base}/runs/${runId}/export?kind=${kind}`;
  }
}
