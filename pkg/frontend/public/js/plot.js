// Parameter-vs-output scatter plot: pure point math plus an SVG renderer.
// A point is one ParameterSet; the error bar is the standard error the
// API reports.  Clicking a point navigates to its ParameterSet.
/** Numeric points from an API plot payload; parameter sets without data
 * (no finished run carried the output key) are dropped. */
export function toScatterPoints(data) {
    const points = [];
    for (const p of data.points) {
        if (p.y_mean === null || typeof p.x !== 'number')
            continue;
        points.push({
            parameterSetId: p.parameter_set_id,
            x: p.x,
            y: p.y_mean,
            stderr: p.y_stderr ?? 0,
            n: p.n,
        });
    }
    points.sort((a, b) => a.x - b.x || a.parameterSetId.localeCompare(b.parameterSetId));
    return points;
}
export function valueRange(values, padFraction = 0.08) {
    if (values.length === 0)
        return { min: 0, max: 1 };
    let min = Math.min(...values);
    let max = Math.max(...values);
    if (min === max) {
        min -= 0.5;
        max += 0.5;
    }
    const pad = (max - min) * padFraction;
    return { min: min - pad, max: max + pad };
}
export const DEFAULT_FRAME = { width: 560, height: 360, margin: 44 };
export function project(points, frame = DEFAULT_FRAME) {
    const xs = valueRange(points.map((p) => p.x));
    const ys = valueRange(points.flatMap((p) => [p.y - p.stderr, p.y + p.stderr]));
    const innerW = frame.width - 2 * frame.margin;
    const innerH = frame.height - 2 * frame.margin;
    const sx = (x) => frame.margin + ((x - xs.min) / (xs.max - xs.min)) * innerW;
    const sy = (y) => frame.height - frame.margin
        - ((y - ys.min) / (ys.max - ys.min)) * innerH;
    return points.map((p) => ({
        parameterSetId: p.parameterSetId,
        px: sx(p.x),
        py: sy(p.y),
        barTop: sy(p.y + p.stderr),
        barBottom: sy(p.y - p.stderr),
        x: p.x,
        y: p.y,
        stderr: p.stderr,
        n: p.n,
    }));
}
const SVG_NS = 'http://www.w3.org/2000/svg';
export function renderScatter(container, data, onPick, frame = DEFAULT_FRAME) {
    container.textContent = '';
    const points = toScatterPoints(data);
    if (points.length === 0) {
        const empty = document.createElement('p');
        empty.className = 'plot-empty';
        empty.textContent = 'no data points: no finished run carries that output key';
        container.appendChild(empty);
        return;
    }
    const projected = project(points, frame);
    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('viewBox', `0 0 ${frame.width} ${frame.height}`);
    svg.setAttribute('class', 'scatter');
    const axes = document.createElementNS(SVG_NS, 'path');
    const m = frame.margin;
    axes.setAttribute('d', `M ${m} ${m} V ${frame.height - m} H ${frame.width - m}`);
    axes.setAttribute('class', 'axes');
    svg.appendChild(axes);
    const xLabel = document.createElementNS(SVG_NS, 'text');
    xLabel.setAttribute('x', String(frame.width / 2));
    xLabel.setAttribute('y', String(frame.height - 8));
    xLabel.setAttribute('class', 'axis-label');
    xLabel.textContent = data.x;
    svg.appendChild(xLabel);
    const yLabel = document.createElementNS(SVG_NS, 'text');
    yLabel.setAttribute('x', '12');
    yLabel.setAttribute('y', String(frame.height / 2));
    yLabel.setAttribute('class', 'axis-label');
    yLabel.setAttribute('transform', `rotate(-90 12 ${frame.height / 2})`);
    yLabel.textContent = data.y;
    svg.appendChild(yLabel);
    for (const p of projected) {
        const group = document.createElementNS(SVG_NS, 'g');
        group.setAttribute('class', 'point');
        group.setAttribute('data-ps', p.parameterSetId);
        const bar = document.createElementNS(SVG_NS, 'line');
        bar.setAttribute('x1', String(p.px));
        bar.setAttribute('x2', String(p.px));
        bar.setAttribute('y1', String(p.barTop));
        bar.setAttribute('y2', String(p.barBottom));
        bar.setAttribute('class', 'error-bar');
        group.appendChild(bar);
        const dot = document.createElementNS(SVG_NS, 'circle');
        dot.setAttribute('cx', String(p.px));
        dot.setAttribute('cy', String(p.py));
        dot.setAttribute('r', '5');
        group.appendChild(dot);
        const tip = document.createElementNS(SVG_NS, 'title');
        tip.textContent = `${data.x}=${p.x} ${data.y}=${p.y} +/- ${p.stderr} (n=${p.n})`;
        group.appendChild(tip);
        group.addEventListener('click', () => onPick(p.parameterSetId));
        svg.appendChild(group);
    }
    container.appendChild(svg);
}
