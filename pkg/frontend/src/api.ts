// Typed client for the sweepd API.  The console performs no computation
// the API does not expose; every view renders these payloads as-is.

import type {
  Analysis,
  Analyzer,
  Host,
  ParameterSet,
  PlotData,
  Run,
  ServiceSpec,
  Simulator,
} from './types.js';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(method: string, url: string, body?: unknown): Promise<T> {
  const init: RequestInit = { method };
  if (body !== undefined) {
    init.headers = { 'Content-Type': 'application/json' };
    init.body = JSON.stringify(body);
  }
  const resp = await fetch(url, init);
  if (!resp.ok) {
    let message = `${resp.status}`;
    try {
      const payload = await resp.json();
      message = payload.message || payload.error || message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, message);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private base: string = '') {}

  private url(path: string, params?: Record<string, string>): string {
    const full = this.base + path;
    if (!params) return full;
    const query = new URLSearchParams(params).toString();
    return query ? `${full}?${query}` : full;
  }

  spec(): Promise<ServiceSpec> {
    return request('GET', this.url('/spec'));
  }

  listSimulators(): Promise<Simulator[]> {
    return request<{ items: Simulator[] }>('GET', this.url('/simulators'))
      .then((r) => r.items);
  }

  getSimulator(id: string): Promise<Simulator> {
    return request('GET', this.url(`/simulators/${id}`));
  }

  listParameterSets(simId: string): Promise<ParameterSet[]> {
    return request<{ items: ParameterSet[] }>(
      'GET', this.url(`/simulators/${simId}/parameter_sets`)).then((r) => r.items);
  }

  getParameterSet(id: string): Promise<ParameterSet> {
    return request('GET', this.url(`/parameter_sets/${id}`));
  }

  createParameterSet(simId: string, values: Record<string, unknown>):
      Promise<{ parameter_set: ParameterSet; created: boolean }> {
    return request('POST', this.url(`/simulators/${simId}/parameter_sets`), values);
  }

  listRuns(psId: string): Promise<Run[]> {
    return request<{ items: Run[] }>(
      'GET', this.url(`/parameter_sets/${psId}/runs`)).then((r) => r.items);
  }

  getRun(id: string): Promise<Run> {
    return request('GET', this.url(`/runs/${id}`));
  }

  runsUpto(psId: string, target: number, host: string):
      Promise<{ items: Run[]; created: number }> {
    return request('POST', this.url(`/parameter_sets/${psId}/runs_upto`),
      { target, host });
  }

  cancelRun(id: string): Promise<Run> {
    return request('POST', this.url(`/runs/${id}/cancel`));
  }

  runFiles(id: string): Promise<string[]> {
    return request<{ items: string[] }>(
      'GET', this.url(`/runs/${id}/files`)).then((r) => r.items);
  }

  runFileUrl(id: string, path: string): string {
    return this.url(`/runs/${id}/file`, { path });
  }

  listHosts(): Promise<Host[]> {
    return request<{ items: Host[] }>('GET', this.url('/hosts')).then((r) => r.items);
  }

  listAnalyzers(simId: string): Promise<Analyzer[]> {
    return request<{ items: Analyzer[] }>(
      'GET', this.url('/analyzers', { simulator_id: simId })).then((r) => r.items);
  }

  listAnalyses(targetId: string): Promise<Analysis[]> {
    return request<{ items: Analysis[] }>(
      'GET', this.url('/analyses', { target_id: targetId })).then((r) => r.items);
  }

  createAnalysis(analyzerId: string, targetId: string,
                 parameters: Record<string, unknown>, host: string): Promise<Analysis> {
    return request('POST', this.url('/analyses'),
      { analyzer_id: analyzerId, target_id: targetId, parameters, host });
  }

  plotData(anchorPsId: string, x: string, y: string): Promise<PlotData> {
    return request('GET', this.url(`/parameter_sets/${anchorPsId}/plot_data`, { x, y }));
  }
}
