import type { DraftRequest, ForecastResponse, HealthResponse } from './types.js';

export class ServiceError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = 'ServiceError';
  }
}

/** Thin fetch wrapper for the two service endpoints. */
export class PredictClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async predict(draft: DraftRequest, signal?: AbortSignal): Promise<ForecastResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/predict`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(draft),
      signal,
    });
    if (!response.ok) {
      throw new ServiceError(`predict failed: HTTP ${response.status}`, response.status);
    }
    return (await response.json()) as ForecastResponse;
  }

  async health(): Promise<HealthResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/health`);
    if (!response.ok) {
      throw new ServiceError(`health failed: HTTP ${response.status}`, response.status);
    }
    return (await response.json()) as HealthResponse;
  }
}
