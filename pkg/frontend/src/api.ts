import type {
  Campaign,
  ExamplePair,
  Ledger,
  ReportView,
  StatsRow,
  Worker,
} from './types.js';

/** Error envelope of the service: {"error": {"code", "message", ...}}. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly extra: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = 'ApiError';
  }

  /** Set on duplicate_report: the report that already covers this URL pair. */
  get reportId(): string | undefined {
    const id = this.extra['report_id'];
    return typeof id === 'string' ? id : undefined;
  }
}

export function toApiError(status: number, bodyText: string): ApiError {
  try {
    const body = JSON.parse(bodyText);
    const err = body?.error;
    if (err && typeof err.code === 'string') {
      const { code, message, ...extra } = err;
      return new ApiError(status, code, String(message ?? code), extra);
    }
  } catch {
    // not the service's envelope; fall through to a generic error
  }
  return new ApiError(status, 'http_error', `HTTP ${status}`);
}

export class Client {
  private token: string | null;

  constructor(readonly baseUrl: string = '', token: string | null = null) {
    this.token = token;
  }

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    if (!resp.ok) throw toApiError(resp.status, text);
    return JSON.parse(text) as T;
  }

  register(name: string): Promise<Worker> {
    return this.request('POST', '/v1/workers', { name });
  }

  me(): Promise<Worker> {
    return this.request('GET', '/v1/me');
  }

  campaigns(): Promise<Campaign[]> {
    return this.request<{ campaigns: Campaign[] }>('GET', '/v1/campaigns').then(
      (body) => body.campaigns,
    );
  }

  campaign(id: string): Promise<Campaign> {
    return this.request('GET', `/v1/campaigns/${id}`);
  }

  examples(campaignId: string): Promise<ExamplePair[]> {
    return this.request<{ examples: ExamplePair[] }>(
      'GET',
      `/v1/campaigns/${campaignId}/examples`,
    ).then((body) => body.examples);
  }

  submitReport(campaignId: string, urlA: string, urlB: string): Promise<ReportView> {
    return this.request('POST', `/v1/campaigns/${campaignId}/reports`, {
      url_a: urlA,
      url_b: urlB,
    });
  }

  report(id: string): Promise<ReportView> {
    return this.request('GET', `/v1/reports/${id}`);
  }

  workerReports(workerId: string): Promise<ReportView[]> {
    return this.request<{ reports: ReportView[] }>(
      'GET',
      `/v1/workers/${workerId}/reports`,
    ).then((body) => body.reports);
  }

  ledger(workerId: string): Promise<Ledger> {
    return this.request('GET', `/v1/workers/${workerId}/ledger`);
  }

  stats(campaignId: string): Promise<StatsRow[]> {
    return this.request<{ series: StatsRow[] }>(
      'GET',
      `/v1/campaigns/${campaignId}/stats`,
    ).then((body) => body.series);
  }

  /** Href for the corpus download link; the browser follows it directly. */
  exportUrl(campaignId: string, maxCost: number): string {
    return `${this.baseUrl}/v1/campaigns/${campaignId}/export?max_cost=${maxCost}`;
  }

  async exportTsv(campaignId: string, maxCost: number): Promise<string> {
    const headers: Record<string, string> = {};
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const resp = await fetch(this.exportUrl(campaignId, maxCost), { headers });
    const text = await resp.text();
    if (!resp.ok) throw toApiError(resp.status, text);
    return text;
  }
}

/**
 * Pre-submit check mirroring just enough of the server's URL rules for
 * inline feedback; the server stays the authority (invalid_url).
 */
export function validateUrlPair(urlA: string, urlB: string): string | null {
  const parsed: URL[] = [];
  for (const raw of [urlA, urlB]) {
    const trimmed = raw.trim();
    let url: URL;
    try {
      url = new URL(trimmed);
    } catch {
      return `not an absolute URL: ${trimmed || '(empty)'}`;
    }
    if (url.protocol !== 'http:' && url.protocol !== 'https:') {
      return `not an http(s) URL: ${trimmed}`;
    }
    parsed.push(url);
  }
  const strip = (u: URL) => {
    u.hash = '';
    return u.href;
  };
  if (strip(parsed[0]) === strip(parsed[1])) {
    return 'both fields hold the same URL';
  }
  return null;
}
