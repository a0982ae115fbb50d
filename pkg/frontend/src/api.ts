/**
 * HTTP client for the what-if service, plus the request scheduler that
 * keeps slider drags from flooding it.
 */

import type {
  ErrorBody,
  FilterRequest,
  FilterResponse,
  PathwayInfo,
  TreeResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

function detailText(body: ErrorBody | null, fallback: string): string {
  if (body === null || body.detail === undefined) return fallback;
  if (typeof body.detail === "string") return body.detail;
  return JSON.stringify(body.detail);
}

export class Client {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let body: ErrorBody | null = null;
      try {
        body = (await response.json()) as ErrorBody;
      } catch {
        // non-JSON error bodies fall back to the status line
      }
      throw new ApiError(response.status, detailText(body, response.statusText));
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getPathways(): Promise<PathwayInfo[]> {
    return this.request<PathwayInfo[]>("/pathways");
  }

  postFilter(request: FilterRequest): Promise<FilterResponse> {
    return this.post<FilterResponse>("/filter", request);
  }

  postTree(request: FilterRequest): Promise<TreeResponse> {
    return this.post<TreeResponse>("/tree", request);
  }
}

/**
 * Rate limiter for /filter calls.
 *
 * A drag fires `schedule` on every input event; the scheduler forwards the
 * first request immediately and coalesces everything that lands inside the
 * window into one trailing call carrying the latest request, so at most one
 * call per window leaves the browser. Each forwarded request gets a fresh
 * sequence number; the reducer drops any response whose number an earlier
 * arrival has already overtaken, so out-of-order completions cannot roll
 * the view back.
 */
export class FilterScheduler {
  private seq = 0;
  private lastSentAt = -Infinity;
  private pending: FilterRequest | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly send: (request: FilterRequest, seq: number) => void,
    readonly windowMs = 150,
  ) {}

  schedule(request: FilterRequest): void {
    const now = Date.now();
    const elapsed = now - this.lastSentAt;
    if (elapsed >= this.windowMs && this.timer === null) {
      this.fire(request, now);
      return;
    }
    this.pending = request;
    if (this.timer === null) {
      this.timer = setTimeout(() => {
        this.timer = null;
        if (this.pending !== null) {
          const queued = this.pending;
          this.pending = null;
          this.fire(queued, Date.now());
        }
      }, this.windowMs - elapsed);
    }
  }

  /** Sequence number of the most recently forwarded request. */
  lastSeq(): number {
    return this.seq;
  }

  private fire(request: FilterRequest, now: number): void {
    this.lastSentAt = now;
    this.seq += 1;
    this.send(request, this.seq);
  }
}
