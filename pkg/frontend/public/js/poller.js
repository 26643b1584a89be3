/** Fixed-interval poller with overlap coalescing and failure backoff.
 *
 * One fetch is in flight at most; if a tick fires while the previous fetch
 * is still pending, that tick is skipped. Consecutive failures double the
 * effective interval (capped) and are surfaced so views can show a retry
 * indicator.
 */
export class Poller {
    constructor(fetchOnce, opts) {
        this.fetchOnce = fetchOnce;
        this.opts = opts;
        this.timer = null;
        this.inFlight = false;
        this.failures = 0;
        this.stopped = true;
        this.intervalMs = opts.intervalMs ?? 2000;
        this.maxBackoffMs = opts.maxBackoffMs ?? 30000;
    }
    currentDelay() {
        return Math.min(this.intervalMs * 2 ** this.failures, this.maxBackoffMs);
    }
    start() {
        if (!this.stopped)
            return;
        this.stopped = false;
        void this.tick();
    }
    stop() {
        this.stopped = true;
        if (this.timer !== null) {
            clearTimeout(this.timer);
            this.timer = null;
        }
    }
    schedule() {
        if (this.stopped)
            return;
        this.timer = setTimeout(() => void this.tick(), this.currentDelay());
    }
    async tick() {
        if (this.inFlight) {
            this.schedule();
            return;
        }
        this.inFlight = true;
        try {
            const value = await this.fetchOnce();
            this.failures = 0;
            if (!this.stopped)
                this.opts.onResult(value);
        }
        catch (err) {
            this.failures += 1;
            if (!this.stopped)
                this.opts.onError?.(err, this.currentDelay());
        }
        finally {
            this.inFlight = false;
        }
        this.schedule();
    }
}
