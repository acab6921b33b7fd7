// Small display helpers shared by the views.
export function shortId(id) {
    return id.length > 10 ? id.slice(0, 10) : id;
}
export function formatValue(value) {
    if (value === null || value === undefined)
        return '';
    return String(value);
}
export function formatValues(values) {
    return Object.keys(values).sort()
        .map((k) => `${k}=${formatValue(values[k])}`)
        .join(', ');
}
export function formatElapsed(seconds) {
    if (seconds === null)
        return '';
    if (seconds < 60)
        return `${seconds}s`;
    return `${(seconds / 60).toFixed(1)}m`;
}
export function formatTimestamp(iso) {
    if (!iso)
        return '';
    return iso.replace('T', ' ').replace(/\.\d+.*$/, '');
}
export function statusClass(status) {
    return `status status-${status}`;
}
