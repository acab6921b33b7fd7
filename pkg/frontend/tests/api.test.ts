import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe('ApiClient', () => {
  it('unwraps item lists', async () => {
    const fetchMock = vi.spyOn(globalThis, 'fetch')
      .mockResolvedValue(jsonResponse({ items: [{ id: 's1' }] }));
    const sims = await new ApiClient().listSimulators();
    expect(sims).toEqual([{ id: 's1' }]);
    expect(fetchMock).toHaveBeenCalledWith('/simulators', { method: 'GET' });
  });

  it('encodes plot-data query parameters against the anchor route', async () => {
    const fetchMock = vi.spyOn(globalThis, 'fetch')
      .mockResolvedValue(jsonResponse({ x: 'p1', y: 'y', points: [] }));
    await new ApiClient().plotData('ps9', 'p1', 'y');
    expect(fetchMock).toHaveBeenCalledWith(
      '/parameter_sets/ps9/plot_data?x=p1&y=y', { method: 'GET' });
  });

  it('posts find-or-create bodies as raw value maps', async () => {
    const fetchMock = vi.spyOn(globalThis, 'fetch')
      .mockResolvedValue(jsonResponse({ parameter_set: { id: 'p' }, created: true }));
    await new ApiClient().createParameterSet('s1', { p1: 0.2, p2: 0.5 });
    const [url, init] = fetchMock.mock.calls[0]!;
    expect(url).toBe('/simulators/s1/parameter_sets');
    expect(JSON.parse((init as RequestInit).body as string))
      .toEqual({ p1: 0.2, p2: 0.5 });
  });

  it('maps error payloads to ApiError with status', async () => {
    vi.spyOn(globalThis, 'fetch').mockResolvedValue(
      jsonResponse({ error: 'read-only mode' }, 403));
    const err = await new ApiClient().cancelRun('r1').catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(403);
    expect((err as ApiError).message).toBe('read-only mode');
  });

  it('builds download URLs with encoded paths', () => {
    const url = new ApiClient().runFileUrl('r1', 'sub dir/out.csv');
    expect(url).toBe('/runs/r1/file?path=sub+dir%2Fout.csv');
  });
});
