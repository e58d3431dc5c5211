import type {
  FilterQuery,
  FilterResponse,
  FrontResponse,
  IndicatorsResponse,
  PinDocument,
  ReferenceFrontResponse,
  RunList,
  RunRecord,
  SnapshotsResponse,
  SolutionDetail,
} from "./types";

/**
 * Error raised for any failed service call. status 0 means the service was
 * unreachable (network error); otherwise it is the HTTP status and `payload`
 * carries the decoded JSON error body, including the conflicting pin pair
 * on a 409.
 */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly payload: Record<string, unknown>,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }

  get unreachable(): boolean {
    return this.status === 0;
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ServiceError(0, {}, `service unreachable: ${String(err)}`);
    }
    let body: unknown = null;
    const text = await response.text();
    if (text) {
      try {
        body = JSON.parse(text);
      } catch {
        body = { detail: text };
      }
    }
    if (!response.ok) {
      const payload = (body ?? {}) as Record<string, unknown>;
      const detail =
        typeof payload.detail === "string" ? payload.detail : response.statusText;
      throw new ServiceError(response.status, payload, detail);
    }
    return body as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string; runs: number }> {
    return this.request("/health");
  }

  listRuns(): Promise<RunList> {
    return this.request("/runs");
  }

  run(id: string): Promise<RunRecord> {
    return this.request(`/runs/${id}`);
  }

  createRun(problem: unknown, config: unknown): Promise<RunRecord> {
    return this.post("/runs", { problem, config });
  }

  front(id: string): Promise<FrontResponse> {
    return this.request(`/runs/${id}/front`);
  }

  snapshots(id: string, fromEvals = 0): Promise<SnapshotsResponse> {
    return this.request(`/runs/${id}/snapshots?from=${fromEvals}`);
  }

  filter(id: string, query: FilterQuery): Promise<FilterResponse> {
    return this.post(`/runs/${id}/filter`, { bounds: query });
  }

  solution(ref: string): Promise<SolutionDetail> {
    return this.request(`/solutions/${encodeURIComponent(ref)}`);
  }

  constrain(
    id: string,
    pins: PinDocument[],
    overrides: Record<string, unknown> = {},
  ): Promise<RunRecord> {
    return this.post(`/runs/${id}/constrain`, { pins, overrides });
  }

  referenceFront(runs: string[]): Promise<ReferenceFrontResponse> {
    return this.request(`/reference-front?runs=${runs.join(",")}`);
  }

  indicators(runs: string[], snapshots = false): Promise<IndicatorsResponse> {
    const flag = snapshots ? "&snapshots=true" : "";
    return this.request(`/indicators?runs=${runs.join(",")}${flag}`);
  }
}
