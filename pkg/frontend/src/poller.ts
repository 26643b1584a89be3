/** Fixed-interval poller with overlap coalescing and failure backoff.
 *
 * One fetch is in flight at most; if a tick fires while the previous fetch
 * is still pending, that tick is skipped. Consecutive failures double the
 * effective interval (capped) and are surfaced so views can show a retry
 * indicator.
 */

export interface PollerOptions<T> {
  intervalMs?: number;
  maxBackoffMs?: number;
  onResult: (value: T) => void;
  onError?: (err: unknown, nextDelayMs: number) => void;
}

export class Poller<T> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private failures = 0;
  private stopped = true;
  private readonly intervalMs: number;
  private readonly maxBackoffMs: number;

  constructor(
    private readonly fetchOnce: () => Promise<T>,
    private readonly opts: PollerOptions<T>,
  ) {
    this.intervalMs = opts.intervalMs ?? 2000;
    this.maxBackoffMs = opts.maxBackoffMs ?? 30000;
  }

  currentDelay(): number {
    return Math.min(this.intervalMs * 2 ** this.failures, this.maxBackoffMs);
  }

  start(): void {
    if (!this.stopped) return;
    this.stopped = false;
    void this.tick();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private schedule(): void {
    if (this.stopped) return;
    this.timer = setTimeout(() => void this.tick(), this.currentDelay());
  }

  private async tick(): Promise<void> {
    if (this.inFlight) {
      this.schedule();
      return;
    }
    this.inFlight = true;
    try {
      const value = await this.fetchOnce();
      this.failures = 0;
      if (!this.stopped) this.opts.onResult(value);
    } catch (err) {
      this.failures += 1;
      if (!this.stopped) this.opts.onError?.(err, this.currentDelay());
    } finally {
      this.inFlight = false;
    }
    this.schedule();
  }
}
