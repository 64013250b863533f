// Typed client for the annotation service. Every number shown in the UI
// comes from these payloads; the client never recomputes statistics.

import type {
  AgreementReport,
  CandidatePage,
  LabelRecord,
  PairView,
  QueuePage,
  WireLabel,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = JSON.parse(text).detail ?? text;
      } catch {
        // non-JSON error body; keep the raw text
      }
      throw new ApiError(response.status, detail);
    }
    return JSON.parse(text) as T;
  }

  /** Raw-text variant: returns the exact payload bytes plus the parse. */
  async requestWithRaw<T>(path: string): Promise<{ raw: string; data: T }> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    const raw = await response.text();
    if (!response.ok) {
      throw new ApiError(response.status, raw);
    }
    return { raw, data: JSON.parse(raw) as T };
  }

  getPair(pairId: string): Promise<PairView> {
    return this.request<PairView>(`/pairs/${pairId}`);
  }

  submitLabel(pairId: string, annotatorId: string, label: WireLabel): Promise<LabelRecord> {
    return this.request<LabelRecord>(`/pairs/${pairId}/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ annotator_id: annotatorId, label }),
    });
  }

  annotatorQueue(annotatorId: string, k = 50, cursor = 0): Promise<QueuePage> {
    return this.request<QueuePage>(
      `/queues/annotator/${annotatorId}?k=${k}&cursor=${cursor}`,
    );
  }

  adjudicationQueue(k?: number, cursor = 0): Promise<QueuePage> {
    const params = k === undefined ? `?cursor=${cursor}` : `?k=${k}&cursor=${cursor}`;
    return this.request<QueuePage>(`/queues/adjudication${params}`);
  }

  articleCandidates(number: string, k = 20, cursor = 0): Promise<CandidatePage> {
    return this.request<CandidatePage>(
      `/articles/${number}/candidates?k=${k}&cursor=${cursor}`,
    );
  }

  agreementStats(): Promise<{ raw: string; data: AgreementReport }> {
    return this.requestWithRaw<AgreementReport>("/stats/agreement");
  }
}
