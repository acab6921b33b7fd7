import { describe, expect, it } from 'vitest';

import {
  createAnalysisForm,
  createParameterSetForm,
  filterParameterSets,
  parameterSetTable,
  runDetailView,
  runsUptoForm,
  sortParameterSets,
} from '../src/views.js';
import type { Analyzer, Host, ParameterSet, Run, Simulator } from '../src/types.js';

const SIM: Simulator = {
  id: 'sim1', name: 'sum_sim', command: 'python3 stub.py',
  input_mode: 'arguments', description: '', created_at: '2026-01-01T00:00:00Z',
  parameter_definitions: [
    { name: 'p1', kind: 'float', default: null, description: '', position: 0 },
    { name: 'p2', kind: 'float', default: null, description: '', position: 1 },
  ],
};

const HOSTS: Host[] = [{
  id: 'h1', name: 'box', address: 'local', transport: 'local', max_concurrent_jobs: 4,
}];

const ANALYZERS: Analyzer[] = [{
  id: 'a1', simulator_id: 'sim1', name: 'agg', command: 'true',
  scope: 'on_parameter_set', parameter_definitions: [],
}];

function ps(id: string, p1: number, p2: number, finished = 0): ParameterSet {
  return {
    id, simulator_id: 'sim1',
    values: { p1, p2 },
    canonical_key: `p1=${p1};p2=${p2}`,
    created_at: '2026-01-01T00:00:00Z',
    run_counts: {
      created: 0, submitted: 0, running: 0,
      finished, failed: 0, cancelled: 0,
    },
  };
}

function run(status: Run['status']): Run {
  return {
    id: 'r1', parameter_set_id: 'ps1', seed: 0, status, host_id: 'h1',
    job_id: status === 'created' ? null : 'j1',
    submitted_at: null, started_at: null, finished_at: null,
    elapsed_seconds: null, exit_code: null, simulator_version: null,
    result_dir: null, result_digest: null, error_notes: [],
    created_at: '2026-01-01T00:00:00Z',
  };
}

describe('parameter set table', () => {
  const sets = [ps('a', 1, 2, 5), ps('b', 2, 2, 3), ps('c', 1, 4, 0)];

  it('filters on the canonical key', () => {
    expect(filterParameterSets(sets, 'p2=4').map((p) => p.id)).toEqual(['c']);
    expect(filterParameterSets(sets, '')).toHaveLength(3);
  });

  it('sorts by parameter value and by status count', () => {
    expect(sortParameterSets(sets, 'p1', true).map((p) => p.id)).toEqual(['a', 'c', 'b']);
    expect(sortParameterSets(sets, 'count:finished', false).map((p) => p.id))
      .toEqual(['a', 'b', 'c']);
  });

  it('renders one row per set with status counts', () => {
    const table = parameterSetTable(SIM, sets,
      { filter: '', sortKey: 'key', sortAsc: true },
      { navigate: () => {}, onState: () => {} });
    const rows = table.querySelectorAll('tbody tr');
    expect(rows.length).toBe(3);
    const first = rows[0];
    expect(first.querySelectorAll('td').length).toBe(2 + 6);
  });

  it('row click navigates to the parameter set', () => {
    const visits: string[] = [];
    const table = parameterSetTable(SIM, sets,
      { filter: '', sortKey: 'p1', sortAsc: true },
      { navigate: (h) => visits.push(h), onState: () => {} });
    (table.querySelector('tbody tr') as HTMLElement).click();
    expect(visits).toEqual(['#/ps/a']);
  });
});

describe('mutation forms per service mode', () => {
  it('all forms exist in read-write mode', () => {
    expect(createParameterSetForm(SIM, 'read_write', () => {})).not.toBeNull();
    expect(runsUptoForm(HOSTS, 'read_write', () => {})).not.toBeNull();
    expect(createAnalysisForm(ANALYZERS, HOSTS, 'read_write', () => {})).not.toBeNull();
  });

  it('no form exists in read-only mode', () => {
    expect(createParameterSetForm(SIM, 'read_only', () => {})).toBeNull();
    expect(runsUptoForm(HOSTS, 'read_only', () => {})).toBeNull();
    expect(createAnalysisForm(ANALYZERS, HOSTS, 'read_only', () => {})).toBeNull();
  });

  it('create form coerces typed values and skips blanks', () => {
    let got: Record<string, unknown> | null = null;
    const form = createParameterSetForm(SIM, 'read_write', (values) => {
      got = values;
    })!;
    const inputs = form.querySelectorAll('input');
    (inputs[0] as HTMLInputElement).value = '1.5';
    form.dispatchEvent(new Event('submit'));
    expect(got).toEqual({ p1: 1.5 });
  });

  it('runs-upto form reports target and host', () => {
    let got: [number, string] | null = null;
    const form = runsUptoForm(HOSTS, 'read_write', (target, host) => {
      got = [target, host];
    })!;
    (form.querySelector('input[name=target]') as HTMLInputElement).value = '7';
    form.dispatchEvent(new Event('submit'));
    expect(got).toEqual([7, 'h1']);
  });
});

describe('run detail', () => {
  it('cancel button present for cancellable runs in read-write mode', () => {
    const view = runDetailView(run('created'), [], () => '', 'read_write', () => {});
    expect(view.querySelector('[data-action=cancel-run]')).not.toBeNull();
  });

  it('cancel button absent in read-only mode and for terminal runs', () => {
    const ro = runDetailView(run('created'), [], () => '', 'read_only', () => {});
    expect(ro.querySelector('[data-action=cancel-run]')).toBeNull();
    const done = runDetailView(run('finished'), [], () => '', 'read_write', () => {});
    expect(done.querySelector('[data-action=cancel-run]')).toBeNull();
  });

  it('lists result files as download links', () => {
    const view = runDetailView(run('finished'), ['out.csv', '_status.json'],
      (p) => `/runs/r1/file?path=${p}`, 'read_write', () => {});
    const links = view.querySelectorAll('ul.files a');
    expect(links.length).toBe(2);
    expect((links[0] as HTMLAnchorElement).getAttribute('href'))
      .toBe('/runs/r1/file?path=out.csv');
  });

  it('shows error notes when present', () => {
    const failed = { ...run('failed'), error_notes: ['archive missing after 5 attempts'] };
    const view = runDetailView(failed, [], () => '', 'read_write', () => {});
    expect(view.textContent).toContain('archive missing');
  });
});
