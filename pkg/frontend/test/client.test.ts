import { describe, expect, it, vi } from 'vitest';

import { PredictClient, ServiceError } from '../src/client';

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

describe('PredictClient', () => {
  it('posts the draft to /predict and parses the forecast', async () => {
    const fetchFn = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe('http://svc/predict');
      expect(init?.method).toBe('POST');
      expect(JSON.parse(String(init?.body))).toEqual({
        text: 'hola',
        link_kind: 'none',
      });
      return jsonResponse({ predictions: {}, model_versions: {}, features: {} });
    });
    const client = new PredictClient('http://svc', fetchFn as typeof fetch);
    await client.predict({ text: 'hola', link_kind: 'none' });
    expect(fetchFn).toHaveBeenCalledTimes(1);
  });

  it('raises ServiceError with the status on non-2xx', async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ detail: 'busy' }, 503));
    const client = new PredictClient('', fetchFn as typeof fetch);
    await expect(client.predict({ text: 'x', link_kind: 'none' })).rejects.toThrowError(
      ServiceError,
    );
    await expect(
      client.predict({ text: 'x', link_kind: 'none' }),
    ).rejects.toMatchObject({ status: 503 });
  });

  it('fetches /health', async () => {
    const fetchFn = vi.fn(async (url: RequestInfo | URL) => {
      expect(String(url)).toBe('/health');
      return jsonResponse({ status: 'ok', models: { R: 'nb/c/v1' } });
    });
    const client = new PredictClient('', fetchFn as typeof fetch);
    const health = await client.health();
    expect(health.models['R']).toBe('nb/c/v1');
  });
});
