// Polling-based auto refresh; the server pushes nothing.

export const DEFAULT_POLL_MS = 5000;

export interface Poller {
  stop(): void;
}

export function startPolling(tick: () => void | Promise<void>,
                             intervalMs: number = DEFAULT_POLL_MS): Poller {
  const handle = setInterval(() => {
    void tick();
  }, intervalMs);
  return {
    stop() {
      clearInterval(handle);
    },
  };
}
