// Small display helpers shared by the views.

import type { RunStatus } from './types.js';

export function shortId(id: string): string {
  return id.length > 10 ? id.slice(0, 10) : id;
}

export function formatValue(value: unknown): string {
  if (value === null || value === undefined) return '';
  return String(value);
}

export function formatValues(values: Record<string, unknown>): string {
  return Object.keys(values).sort()
    .map((k) => `${k}=${formatValue(values[k])}`)
    .join(', ');
}

export function formatElapsed(seconds: number | null): string {
  if (seconds === null) return '';
  if (seconds < 60) return `${seconds}s`;
  return `${(seconds / 60).toFixed(1)}m`;
}

export function formatTimestamp(iso: string | null): string {
  if (!iso) return '';
  return iso.replace('T', ' ').replace(/\.\d+.*$/, '');
}

export function statusClass(status: RunStatus): string {
  return `status status-${status}`;
}
