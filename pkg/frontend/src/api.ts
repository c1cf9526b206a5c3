import {
  ClassifyRequest,
  ClassifyResponse,
  ModelInfo,
  RangeReport,
  RecommendRequest,
  ServiceError,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client over the service HTTP API.  The fetch function is
 * injectable so tests can intercept traffic or add latency.
 */
export class ApiClient {
  constructor(
    public baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(body),
      });
    } catch (err) {
      throw new ServiceError(0, 'connection_failed', String(err));
    }
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ServiceError(
        response.status,
        payload.error ?? 'http_error',
        payload.message ?? `HTTP ${response.status}`,
        payload.fields ?? [],
      );
    }
    return payload as T;
  }

  async classify(req: ClassifyRequest): Promise<ClassifyResponse> {
    return this.post<ClassifyResponse>('/v1/classify', req);
  }

  async recommend(req: RecommendRequest): Promise<RangeReport> {
    return this.post<RangeReport>('/v1/recommend', req);
  }

  async modelInfo(): Promise<ModelInfo> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/v1/model`);
    } catch (err) {
      throw new ServiceError(0, 'connection_failed', String(err));
    }
    if (!response.ok) {
      throw new ServiceError(response.status, 'http_error', `HTTP ${response.status}`);
    }
    return (await response.json()) as ModelInfo;
  }
}
