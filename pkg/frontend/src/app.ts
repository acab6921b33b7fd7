// Router and page composition.  Hash routes:
//   #/            simulators
//   #/sim/<id>    parameter-set table + new-ParameterSet form
//   #/ps/<id>     runs, forms, analyses, scatter plot anchored here
//   #/run/<id>    provenance and result files
// Every view re-renders on a polling tick; the server is the only state.

import { ApiClient, ApiError } from './api.js';
import { modeAfterResponse } from './affordances.js';
import { renderScatter } from './plot.js';
import { DEFAULT_POLL_MS, startPolling, type Poller } from './poll.js';
import type { ServiceMode } from './types.js';
import {
  analysesTable,
  createAnalysisForm,
  createParameterSetForm,
  el,
  errorBanner,
  parameterSetTable,
  plotControls,
  psSummary,
  runDetailView,
  runsTable,
  runsUptoForm,
  simulatorsView,
  type TableState,
} from './views.js';

const api = new ApiClient('');

interface AppState {
  mode: ServiceMode;
  table: Record<string, TableState>;
  plot: { x: string; y: string };
}

const state: AppState = {
  mode: 'read_only',
  table: {},
  plot: { x: '', y: 'y' },
};

function navigate(hash: string): void {
  window.location.hash = hash;
}

function appRoot(): HTMLElement {
  return document.getElementById('app')!;
}

function setBody(...nodes: (HTMLElement | null)[]): void {
  const root = appRoot();
  root.textContent = '';
  for (const node of nodes) {
    if (node) root.append(node);
  }
}

function handleError(err: unknown): void {
  if (err instanceof ApiError) {
    state.mode = modeAfterResponse(state.mode, err.status);
    appRoot().prepend(errorBanner(`API error: ${err.message}`));
  } else {
    appRoot().prepend(errorBanner(String(err)));
  }
}

// -- pages -------------------------------------------------------------------

async function showSimulators(): Promise<void> {
  const sims = await api.listSimulators();
  setBody(simulatorsView(sims, navigate));
}

async function showSimulator(simId: string): Promise<void> {
  const [sim, sets] = await Promise.all([
    api.getSimulator(simId),
    api.listParameterSets(simId),
  ]);
  const tableState: TableState = state.table[simId]
    ?? { filter: '', sortKey: 'key', sortAsc: true };
  const table = parameterSetTable(sim, sets, tableState, {
    navigate,
    onState: (next) => {
      state.table[simId] = next;
      void render();
    },
  });
  const form = createParameterSetForm(sim, state.mode, async (values) => {
    try {
      const out = await api.createParameterSet(sim.id, values);
      navigate(`#/ps/${out.parameter_set.id}`);
    } catch (err) {
      handleError(err);
    }
  });
  setBody(
    el('h2', {}, `Simulator ${sim.name}`),
    el('p', { class: 'mono hint' }, sim.command),
    table,
    form,
  );
}

async function showParameterSet(psId: string): Promise<void> {
  const ps = await api.getParameterSet(psId);
  const [sim, runs, hosts, analyzers, analyses] = await Promise.all([
    api.getSimulator(ps.simulator_id),
    api.listRuns(psId),
    api.listHosts().catch(() => []),
    api.listAnalyzers(ps.simulator_id).catch(() => []),
    api.listAnalyses(psId).catch(() => []),
  ]);
  if (!state.plot.x) {
    state.plot.x = sim.parameter_definitions[0]?.name ?? '';
  }

  const plotArea = el('div', { class: 'plot-area' });
  const controls = plotControls(sim, state.plot.x, state.plot.y, (x, y) => {
    state.plot = { x, y };
    void drawPlot();
  });
  const drawPlot = async () => {
    if (!state.plot.x || !state.plot.y) return;
    try {
      const data = await api.plotData(psId, state.plot.x, state.plot.y);
      renderScatter(plotArea, data, (pickedPs) => navigate(`#/ps/${pickedPs}`));
    } catch (err) {
      plotArea.textContent = '';
      plotArea.append(errorBanner(`plot failed: ${(err as Error).message}`));
    }
  };

  const uptoForm = runsUptoForm(hosts, state.mode, async (target, host) => {
    try {
      await api.runsUpto(psId, target, host);
      void render();
    } catch (err) {
      handleError(err);
    }
  });
  const analysisForm = createAnalysisForm(
    analyzers.filter((a) => a.scope === 'on_parameter_set'), hosts, state.mode,
    async (analyzerId, host) => {
      try {
        await api.createAnalysis(analyzerId, psId, {}, host);
        void render();
      } catch (err) {
        handleError(err);
      }
    });

  setBody(
    el('h2', {}, `ParameterSet ${ps.id.slice(0, 10)}`),
    el('p', {},
      el('a', { href: `#/sim/${sim.id}` }, `simulator ${sim.name}`)),
    psSummary(ps),
    runsTable(runs, navigate),
    uptoForm,
    el('h3', {}, 'Analyses'),
    analysesTable(analyses),
    analysisForm,
    el('h3', {}, 'Scatter plot'),
    controls,
    plotArea,
  );
  await drawPlot();
}

async function showRun(runId: string): Promise<void> {
  const run = await api.getRun(runId);
  const files = run.result_dir ? await api.runFiles(runId).catch(() => []) : [];
  setBody(
    el('p', {}, el('a', { href: `#/ps/${run.parameter_set_id}` }, 'back to parameter set')),
    runDetailView(run, files, (path) => api.runFileUrl(runId, path), state.mode,
      async () => {
        try {
          await api.cancelRun(runId);
          void render();
        } catch (err) {
          handleError(err);
        }
      }),
  );
}

// -- router ------------------------------------------------------------------

async function render(): Promise<void> {
  const hash = window.location.hash;
  try {
    if (hash.startsWith('#/sim/')) {
      await showSimulator(hash.slice('#/sim/'.length));
    } else if (hash.startsWith('#/ps/')) {
      await showParameterSet(hash.slice('#/ps/'.length));
    } else if (hash.startsWith('#/run/')) {
      await showRun(hash.slice('#/run/'.length));
    } else {
      await showSimulators();
    }
  } catch (err) {
    setBody(errorBanner(
      err instanceof ApiError ? `API error: ${err.message}` : String(err)));
  }
  const badge = document.getElementById('mode-badge');
  if (badge) {
    badge.textContent = state.mode === 'read_only' ? 'read-only' : 'read-write';
    badge.className = state.mode;
  }
}

let poller: Poller | null = null;

async function start(): Promise<void> {
  try {
    const spec = await api.spec();
    state.mode = spec.mode;
  } catch {
    state.mode = 'read_only';
  }
  window.addEventListener('hashchange', () => {
    void render();
  });
  await render();
  const params = new URLSearchParams(window.location.search);
  const interval = Number(params.get('poll') ?? '') || DEFAULT_POLL_MS;
  poller = startPolling(render, interval);
  void poller;
}

void start();
