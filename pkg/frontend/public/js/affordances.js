// Read-only awareness: which mutation affordances exist for a service mode.
// A 403 from any endpoint collapses the console to read-only as well.
const ALL_ACTIONS = [
    'create-parameter-set', 'runs-upto', 'create-analysis', 'cancel-run',
];
export function mutationsAllowed(mode) {
    return mode === 'read_write';
}
export function visibleActions(mode) {
    return mutationsAllowed(mode) ? ALL_ACTIONS : [];
}
/** The mode to adopt after a response: 403 means mutations are off. */
export function modeAfterResponse(current, status) {
    return status === 403 ? 'read_only' : current;
}
