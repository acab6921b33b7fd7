import { describe, expect, it } from 'vitest';

import { project, renderScatter, toScatterPoints, valueRange } from '../src/plot.js';
import type { PlotData } from '../src/types.js';
import anchorFixture from './fixtures/plot_data_anchor.json';
import cliCsv from './fixtures/cli_plot_data_p2_2.csv?raw';

const anchorPayload = anchorFixture as unknown as PlotData;

interface CsvRow {
  x: number;
  mean: number | null;
  stderr: number | null;
  n: number;
  excluded: number;
}

function parseCsv(text: string): CsvRow[] {
  const lines = text.trim().split('\n');
  expect(lines[0]).toBe('x,y_mean,y_stderr,n,excluded');
  return lines.slice(1).map((line) => {
    const [x, mean, stderr, n, excluded] = line.split(',');
    return {
      x: Number(x),
      mean: mean === '' ? null : Number(mean),
      stderr: stderr === '' ? null : Number(stderr),
      n: Number(n),
      excluded: Number(excluded),
    };
  });
}

describe('scatter points vs CLI plot-data (differential)', () => {
  it('renders exactly the CSV rows for x=p1, y=y, p2=2.0', () => {
    const points = toScatterPoints(anchorPayload);
    const rows = parseCsv(cliCsv);
    expect(points.length).toBe(rows.length);
    const fromConsole = points.map((p) => [p.x, p.y, p.stderr, p.n]);
    const fromCli = rows.map((r) => [r.x, r.mean, r.stderr, r.n]);
    expect(fromConsole).toEqual(fromCli);
  });

  it('is a slope-1 line for the sum stub', () => {
    const points = toScatterPoints(anchorPayload);
    expect(points.length).toBe(5);
    for (let i = 1; i < points.length; i += 1) {
      const slope = (points[i].y - points[i - 1].y) / (points[i].x - points[i - 1].x);
      expect(slope).toBe(1);
    }
  });
});

describe('toScatterPoints', () => {
  const base = { y_stderr: 0, n: 1, excluded: 0, values: {} };

  it('drops parameter sets without data and sorts by x', () => {
    const data: PlotData = {
      x: 'p1', y: 'y',
      points: [
        { parameter_set_id: 'b', x: 2, y_mean: 5, ...base },
        { parameter_set_id: 'a', x: 1, y_mean: null, ...base },
        { parameter_set_id: 'c', x: 0.5, y_mean: 3, ...base },
      ],
    };
    const points = toScatterPoints(data);
    expect(points.map((p) => p.parameterSetId)).toEqual(['c', 'b']);
  });

  it('treats missing stderr as zero', () => {
    const data: PlotData = {
      x: 'p1', y: 'y',
      points: [{
        parameter_set_id: 'a', x: 1, y_mean: 2, y_stderr: null,
        n: 1, excluded: 0, values: {},
      }],
    };
    expect(toScatterPoints(data)[0].stderr).toBe(0);
  });
});

describe('projection', () => {
  it('pads a degenerate range', () => {
    const r = valueRange([3, 3, 3]);
    expect(r.min).toBeLessThan(3);
    expect(r.max).toBeGreaterThan(3);
  });

  it('maps larger y to smaller pixel y and spans error bars', () => {
    const projected = project([
      { parameterSetId: 'a', x: 0, y: 0, stderr: 1, n: 2 },
      { parameterSetId: 'b', x: 10, y: 10, stderr: 0, n: 2 },
    ]);
    const [low, high] = projected;
    expect(high.py).toBeLessThan(low.py);
    expect(low.barTop).toBeLessThan(low.py);
    expect(low.barBottom).toBeGreaterThan(low.py);
    expect(high.barTop).toBe(high.py);
  });
});

describe('renderScatter', () => {
  it('draws one point group per parameter set with error bars', () => {
    const container = document.createElement('div');
    renderScatter(container, anchorPayload, () => {});
    const groups = container.querySelectorAll('g.point');
    expect(groups.length).toBe(5);
    expect(container.querySelectorAll('line.error-bar').length).toBe(5);
    expect(container.querySelectorAll('circle').length).toBe(5);
  });

  it('click-through reports the parameter set id', () => {
    const picked: string[] = [];
    const container = document.createElement('div');
    renderScatter(container, anchorPayload, (id) => picked.push(id));
    const first = container.querySelector('g.point') as SVGGElement;
    first.dispatchEvent(new MouseEvent('click'));
    expect(picked).toEqual([anchorPayload.points[0].parameter_set_id]);
  });

  it('shows a message when no point has data', () => {
    const container = document.createElement('div');
    renderScatter(container, {
      x: 'p1', y: 'nope',
      points: [{
        parameter_set_id: 'a', x: 1, y_mean: null, y_stderr: null,
        n: 0, excluded: 2, values: {},
      }],
    }, () => {});
    expect(container.querySelector('svg')).toBeNull();
    expect(container.textContent).toContain('no data points');
  });
});
