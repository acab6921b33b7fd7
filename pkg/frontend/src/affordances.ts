// Read-only awareness: which mutation affordances exist for a service mode.
// A 403 from any endpoint collapses the console to read-only as well.

import type { ServiceMode } from './types.js';

export type MutationAction = 'create-parameter-set' | 'runs-upto' | 'create-analysis' | 'cancel-run';

const ALL_ACTIONS: MutationAction[] = [
  'create-parameter-set', 'runs-upto', 'create-analysis', 'cancel-run',
];

export function mutationsAllowed(mode: ServiceMode): boolean {
  return mode === 'read_write';
}

export function visibleActions(mode: ServiceMode): MutationAction[] {
  return mutationsAllowed(mode) ? ALL_ACTIONS : [];
}

/** The mode to adopt after a response: 403 means mutations are off. */
export function modeAfterResponse(current: ServiceMode, status: number): ServiceMode {
  return status === 403 ? 'read_only' : current;
}
