// Typed client for the sweepd API.  The console performs no computation
// the API does not expose; every view renders these payloads as-is.
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
async function request(method, url, body) {
    const init = { method };
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
        }
        catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError(resp.status, message);
    }
    return (await resp.json());
}
export class ApiClient {
    constructor(base = '') {
        this.base = base;
    }
    url(path, params) {
        const full = this.base + path;
        if (!params)
            return full;
        const query = new URLSearchParams(params).toString();
        return query ? `${full}?${query}` : full;
    }
    spec() {
        return request('GET', this.url('/spec'));
    }
    listSimulators() {
        return request('GET', this.url('/simulators'))
            .then((r) => r.items);
    }
    getSimulator(id) {
        return request('GET', this.url(`/simulators/${id}`));
    }
    listParameterSets(simId) {
        return request('GET', this.url(`/simulators/${simId}/parameter_sets`)).then((r) => r.items);
    }
    getParameterSet(id) {
        return request('GET', this.url(`/parameter_sets/${id}`));
    }
    createParameterSet(simId, values) {
        return request('POST', this.url(`/simulators/${simId}/parameter_sets`), values);
    }
    listRuns(psId) {
        return request('GET', this.url(`/parameter_sets/${psId}/runs`)).then((r) => r.items);
    }
    getRun(id) {
        return request('GET', this.url(`/runs/${id}`));
    }
    runsUpto(psId, target, host) {
        return request('POST', this.url(`/parameter_sets/${psId}/runs_upto`), { target, host });
    }
    cancelRun(id) {
        return request('POST', this.url(`/runs/${id}/cancel`));
    }
    runFiles(id) {
        return request('GET', this.url(`/runs/${id}/files`)).then((r) => r.items);
    }
    runFileUrl(id, path) {
        return this.url(`/runs/${id}/file`, { path });
    }
    listHosts() {
        return request('GET', this.url('/hosts')).then((r) => r.items);
    }
    listAnalyzers(simId) {
        return request('GET', this.url('/analyzers', { simulator_id: simId })).then((r) => r.items);
    }
    listAnalyses(targetId) {
        return request('GET', this.url('/analyses', { target_id: targetId })).then((r) => r.items);
    }
    createAnalysis(analyzerId, targetId, parameters, host) {
        return request('POST', this.url('/analyses'), { analyzer_id: analyzerId, target_id: targetId, parameters, host });
    }
    plotData(anchorPsId, x, y) {
        return request('GET', this.url(`/parameter_sets/${anchorPsId}/plot_data`, { x, y }));
    }
}
