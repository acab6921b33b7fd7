// DOM builders for every page.  No framework: plain elements, explicit
// event wiring, all state owned by the router in app.ts.
import { RUN_STATUSES } from './types.js';
import { mutationsAllowed } from './affordances.js';
import { formatElapsed, formatTimestamp, formatValue, formatValues, shortId, statusClass } from './format.js';
export function el(tag, attrs = {}, ...children) {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        node.setAttribute(key, value);
    }
    for (const child of children) {
        if (child === null || child === undefined)
            continue;
        node.append(child);
    }
    return node;
}
export function errorBanner(message) {
    return el('div', { class: 'error-banner' }, message);
}
// ---------------------------------------------------------------------------
// Simulators
// ---------------------------------------------------------------------------
export function simulatorsView(sims, navigate) {
    const root = el('section', {}, el('h2', {}, 'Simulators'));
    if (sims.length === 0) {
        root.append(el('p', { class: 'hint' }, 'no simulators registered yet'));
        return root;
    }
    const body = el('tbody');
    for (const sim of sims) {
        const row = el('tr', { class: 'clickable' }, el('td', {}, sim.name), el('td', {}, sim.parameter_definitions.map((d) => d.name).join(', ')), el('td', {}, sim.input_mode), el('td', { class: 'mono' }, sim.command));
        row.addEventListener('click', () => navigate(`#/sim/${sim.id}`));
        body.append(row);
    }
    root.append(el('table', { class: 'data' }, el('thead', {}, el('tr', {}, el('th', {}, 'name'), el('th', {}, 'parameters'), el('th', {}, 'input mode'), el('th', {}, 'command'))), body));
    return root;
}
export function filterParameterSets(sets, needle) {
    if (!needle.trim())
        return sets;
    const want = needle.trim().toLowerCase();
    return sets.filter((ps) => ps.canonical_key.toLowerCase().includes(want) || ps.id.startsWith(want));
}
export function sortParameterSets(sets, key, ascending) {
    const sorted = [...sets];
    const direction = ascending ? 1 : -1;
    sorted.sort((a, b) => {
        let cmp;
        if (key === 'key') {
            cmp = a.canonical_key.localeCompare(b.canonical_key);
        }
        else if (key.startsWith('count:')) {
            const status = key.slice(6);
            cmp = (a.run_counts?.[status] ?? 0) - (b.run_counts?.[status] ?? 0);
        }
        else {
            const av = a.values[key];
            const bv = b.values[key];
            if (typeof av === 'number' && typeof bv === 'number') {
                cmp = av - bv;
            }
            else {
                cmp = String(av).localeCompare(String(bv));
            }
        }
        return cmp !== 0 ? cmp * direction : a.id.localeCompare(b.id);
    });
    return sorted;
}
export function parameterSetTable(sim, sets, state, handlers) {
    const root = el('section', {});
    const filterBox = el('input', {
        type: 'search', placeholder: 'filter by parameter values', value: state.filter,
        class: 'filter-box', 'data-role': 'ps-filter',
    });
    filterBox.addEventListener('input', () => handlers.onState({ ...state, filter: filterBox.value }));
    root.append(el('div', { class: 'table-tools' }, filterBox, el('span', { class: 'hint' }, `${sets.length} parameter sets`)));
    const paramNames = sim.parameter_definitions.map((d) => d.name);
    const statuses = RUN_STATUSES;
    const headRow = el('tr');
    const addHeader = (label, key) => {
        const th = el('th', { class: 'sortable' }, label + (state.sortKey === key ? (state.sortAsc ? ' ▲' : ' ▼') : ''));
        th.addEventListener('click', () => handlers.onState({
            ...state, sortKey: key,
            sortAsc: state.sortKey === key ? !state.sortAsc : true,
        }));
        headRow.append(th);
    };
    for (const name of paramNames)
        addHeader(name, name);
    for (const status of statuses)
        addHeader(status, `count:${status}`);
    const visible = sortParameterSets(filterParameterSets(sets, state.filter), state.sortKey, state.sortAsc);
    const body = el('tbody');
    for (const ps of visible) {
        const row = el('tr', { class: 'clickable', 'data-ps': ps.id });
        for (const name of paramNames) {
            row.append(el('td', { class: 'mono' }, formatValue(ps.values[name])));
        }
        for (const status of statuses) {
            const count = ps.run_counts?.[status] ?? 0;
            row.append(el('td', { class: count > 0 ? statusClass(status) : 'zero' }, String(count)));
        }
        row.addEventListener('click', () => handlers.navigate(`#/ps/${ps.id}`));
        body.append(row);
    }
    root.append(el('table', { class: 'data' }, el('thead', {}, headRow), body));
    return root;
}
// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------
export function runsTable(runs, navigate) {
    const body = el('tbody');
    for (const run of runs) {
        const row = el('tr', { class: 'clickable' }, el('td', { class: 'mono' }, shortId(run.id)), el('td', {}, String(run.seed)), el('td', { class: statusClass(run.status) }, run.status), el('td', {}, run.exit_code === null ? '' : String(run.exit_code)), el('td', {}, formatElapsed(run.elapsed_seconds)), el('td', {}, formatTimestamp(run.finished_at)));
        row.addEventListener('click', () => navigate(`#/run/${run.id}`));
        body.append(row);
    }
    return el('table', { class: 'data' }, el('thead', {}, el('tr', {}, el('th', {}, 'run'), el('th', {}, 'seed'), el('th', {}, 'status'), el('th', {}, 'exit'), el('th', {}, 'elapsed'), el('th', {}, 'finished at'))), body);
}
export function runDetailView(run, files, fileUrl, mode, onCancel) {
    const root = el('section', {}, el('h2', {}, `Run ${shortId(run.id)}`));
    const rows = [
        ['id', run.id],
        ['parameter set', run.parameter_set_id],
        ['seed', String(run.seed)],
        ['status', run.status],
        ['host', run.host_id],
        ['job id', run.job_id ?? ''],
        ['submitted at', formatTimestamp(run.submitted_at)],
        ['started at', formatTimestamp(run.started_at)],
        ['finished at', formatTimestamp(run.finished_at)],
        ['elapsed', formatElapsed(run.elapsed_seconds)],
        ['exit code', run.exit_code === null ? '' : String(run.exit_code)],
        ['simulator version', run.simulator_version ?? ''],
        ['result digest', run.result_digest ?? ''],
    ];
    const dl = el('dl', { class: 'provenance' });
    for (const [label, value] of rows) {
        dl.append(el('dt', {}, label), el('dd', { class: 'mono' }, value));
    }
    root.append(dl);
    if (run.error_notes.length > 0) {
        const notes = el('ul', { class: 'error-notes' });
        for (const note of run.error_notes)
            notes.append(el('li', {}, note));
        root.append(el('h3', {}, 'Error notes'), notes);
    }
    if (mutationsAllowed(mode) && (run.status === 'created' || run.status === 'submitted')) {
        const cancel = el('button', { 'data-action': 'cancel-run' }, 'cancel run');
        cancel.addEventListener('click', onCancel);
        root.append(el('div', { class: 'actions' }, cancel));
    }
    root.append(el('h3', {}, 'Result files'));
    if (files.length === 0) {
        root.append(el('p', { class: 'hint' }, 'no collected files'));
    }
    else {
        const list = el('ul', { class: 'files' });
        for (const path of files) {
            list.append(el('li', {}, el('a', { href: fileUrl(path), download: path.split('/').pop() ?? path }, path)));
        }
        root.append(list);
    }
    return root;
}
// ---------------------------------------------------------------------------
// Mutation forms (absent entirely in read-only mode)
// ---------------------------------------------------------------------------
export function createParameterSetForm(sim, mode, onSubmit) {
    if (!mutationsAllowed(mode))
        return null;
    const form = el('form', { class: 'panel', 'data-action': 'create-parameter-set' }, el('h3', {}, 'New ParameterSet'));
    const inputs = new Map();
    for (const def of sim.parameter_definitions) {
        const input = el('input', {
            name: def.name,
            placeholder: def.default === null ? def.kind : `default ${def.default}`,
        });
        inputs.set(def.name, input);
        form.append(el('label', {}, `${def.name} (${def.kind})`, input));
    }
    form.append(el('button', { type: 'submit' }, 'find or create'));
    form.addEventListener('submit', (ev) => {
        ev.preventDefault();
        const values = {};
        for (const def of sim.parameter_definitions) {
            const raw = inputs.get(def.name).value.trim();
            if (raw === '')
                continue;
            if (def.kind === 'integer')
                values[def.name] = Number.parseInt(raw, 10);
            else if (def.kind === 'float')
                values[def.name] = Number.parseFloat(raw);
            else if (def.kind === 'boolean')
                values[def.name] = raw === 'true';
            else
                values[def.name] = raw;
        }
        onSubmit(values);
    });
    return form;
}
export function runsUptoForm(hosts, mode, onSubmit) {
    if (!mutationsAllowed(mode))
        return null;
    const target = el('input', { type: 'number', min: '1', value: '5', name: 'target' });
    const hostPick = el('select', { name: 'host' });
    for (const host of hosts) {
        hostPick.append(el('option', { value: host.id }, host.name));
    }
    const form = el('form', { class: 'panel', 'data-action': 'runs-upto' }, el('h3', {}, 'Runs up to'), el('label', {}, 'target count', target), el('label', {}, 'host', hostPick), el('button', { type: 'submit' }, 'create runs'));
    form.addEventListener('submit', (ev) => {
        ev.preventDefault();
        onSubmit(Number.parseInt(target.value, 10), hostPick.value);
    });
    return form;
}
export function createAnalysisForm(analyzers, hosts, mode, onSubmit) {
    if (!mutationsAllowed(mode))
        return null;
    if (analyzers.length === 0 || hosts.length === 0)
        return null;
    const pick = el('select', { name: 'analyzer' });
    for (const analyzer of analyzers) {
        pick.append(el('option', { value: analyzer.id }, `${analyzer.name} (${analyzer.scope})`));
    }
    const hostPick = el('select', { name: 'host' });
    for (const host of hosts) {
        hostPick.append(el('option', { value: host.id }, host.name));
    }
    const form = el('form', { class: 'panel', 'data-action': 'create-analysis' }, el('h3', {}, 'New Analysis'), el('label', {}, 'analyzer', pick), el('label', {}, 'host', hostPick), el('button', { type: 'submit' }, 'create analysis'));
    form.addEventListener('submit', (ev) => {
        ev.preventDefault();
        onSubmit(pick.value, hostPick.value);
    });
    return form;
}
// ---------------------------------------------------------------------------
// Analyses
// ---------------------------------------------------------------------------
export function analysesTable(analyses) {
    if (analyses.length === 0) {
        return el('p', { class: 'hint' }, 'no analyses yet');
    }
    const body = el('tbody');
    for (const a of analyses) {
        body.append(el('tr', {}, el('td', { class: 'mono' }, shortId(a.id)), el('td', { class: statusClass(a.status) }, a.status), el('td', {}, a.exit_code === null ? '' : String(a.exit_code)), el('td', {}, String(a.input_run_ids.length))));
    }
    return el('table', { class: 'data' }, el('thead', {}, el('tr', {}, el('th', {}, 'analysis'), el('th', {}, 'status'), el('th', {}, 'exit'), el('th', {}, 'inputs'))), body);
}
// ---------------------------------------------------------------------------
// Plot controls
// ---------------------------------------------------------------------------
export function plotControls(sim, currentX, currentY, onChange) {
    const xPick = el('select', { name: 'x', 'data-role': 'plot-x' });
    for (const def of sim.parameter_definitions) {
        const option = el('option', { value: def.name }, def.name);
        if (def.name === currentX)
            option.setAttribute('selected', '');
        xPick.append(option);
    }
    const yInput = el('input', {
        name: 'y', value: currentY, placeholder: 'output key', 'data-role': 'plot-y',
    });
    const form = el('form', { class: 'plot-controls' }, el('label', {}, 'x parameter', xPick), el('label', {}, 'output key', yInput), el('button', { type: 'submit' }, 'plot'));
    form.addEventListener('submit', (ev) => {
        ev.preventDefault();
        if (yInput.value.trim())
            onChange(xPick.value, yInput.value.trim());
    });
    return form;
}
export function psSummary(ps) {
    return el('p', { class: 'ps-values mono' }, formatValues(ps.values));
}
