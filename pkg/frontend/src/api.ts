/**
 * Typed client for the curation review HTTP API.
 *
 * Every method maps onto one endpoint; nothing here touches the DOM, so
 * the client runs identically in the browser, in tests, and in node
 * scripts driving a live server.
 */

export type Decision = 'accepted' | 'rejected' | 'undecided';

export const DECISIONS: readonly Decision[] = ['accepted', 'rejected', 'undecided'];

export interface CandidateView {
  id: string;
  source_id: string;
  model_tag: string;
  auto_stats: Record<string, number>;
  decision: Decision;
  image_url: string;
  mask_url: string;
  probmap_url: string;
}

export interface StoreStats {
  total: number;
  accepted: number;
  rejected: number;
  undecided: number;
}

export interface ExportResult {
  exported: number;
  manifest: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = 'ApiError';
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === 'string') return body.detail;
    return JSON.stringify(body);
  } catch {
    return response.statusText || 'request failed';
  }
}

export class CurationApi {
  constructor(private readonly baseUrl: string = '') {}

  /** Absolute URL for an asset path the server handed back (e.g. image_url). */
  assetUrl(path: string): string {
    return this.baseUrl + path;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  listCandidates(state?: Decision): Promise<CandidateView[]> {
    const query = state ? `?state=${encodeURIComponent(state)}` : '';
    return this.request<CandidateView[]>(`/candidates${query}`);
  }

  getCandidate(id: string): Promise<CandidateView> {
    return this.request<CandidateView>(`/candidates/${encodeURIComponent(id)}`);
  }

  postDecision(id: string, decision: Decision, annotator = ''): Promise<CandidateView> {
    return this.request<CandidateView>(`/candidates/${encodeURIComponent(id)}/decision`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ decision, annotator }),
    });
  }

  getStats(): Promise<StoreStats> {
    return this.request<StoreStats>('/stats');
  }

  exportAccepted(outDir: string): Promise<ExportResult> {
    return this.request<ExportResult>('/export', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ out_dir: outDir }),
    });
  }
}
