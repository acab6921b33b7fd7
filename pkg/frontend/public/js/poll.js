// Polling-based auto refresh; the server pushes nothing.
export const DEFAULT_POLL_MS = 5000;
export function startPolling(tick, intervalMs = DEFAULT_POLL_MS) {
    const handle = setInterval(() => {
        void tick();
    }, intervalMs);
    return {
        stop() {
            clearInterval(handle);
        },
    };
}
