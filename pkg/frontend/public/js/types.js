// Payload shapes returned by the sweepd API.
export const RUN_STATUSES = [
    'created', 'submitted', 'running', 'finished', 'failed', 'cancelled',
];
