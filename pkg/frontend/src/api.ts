import type { CandidateListOut, EventAck, HitView, Span, UsageEventIn } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client; the fetch function is injectable for tests. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getHit(hitId: string, workerId: string): Promise<HitView> {
    const params = new URLSearchParams({ worker: workerId });
    return this.request<HitView>(`/api/hits/${hitId}?${params}`);
  }

  getCandidates(hitId: string, span: Span, workerId: string): Promise<CandidateListOut> {
    const params = new URLSearchParams({
      sentence: span.sentence_id,
      start: String(span.start),
      end: String(span.end),
      worker: workerId,
    });
    return this.request<CandidateListOut>(`/api/hits/${hitId}/candidates?${params}`);
  }

  postEvent(event: UsageEventIn): Promise<EventAck> {
    return this.request<EventAck>("/api/events", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(event),
    });
  }
}
