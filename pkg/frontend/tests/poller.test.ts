import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { Poller } from "../src/poller.js";

describe("Poller", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("polls on the configured 2s cadence", async () => {
    const fetchOnce = vi.fn(async () => 42);
    const onResult = vi.fn();
    const poller = new Poller(fetchOnce, { intervalMs: 2000, onResult });
    poller.start();
    await vi.advanceTimersByTimeAsync(6000);
    poller.stop();
    // immediate tick + one every 2s
    expect(fetchOnce).toHaveBeenCalledTimes(4);
    expect(onResult).toHaveBeenLastCalledWith(42);
  });

  it("coalesces overlapping polls: one request in flight at most", async () => {
    let inFlight = 0;
    let maxInFlight = 0;
    const fetchOnce = vi.fn(async () => {
      inFlight += 1;
      maxInFlight = Math.max(maxInFlight, inFlight);
      await new Promise((r) => setTimeout(r, 5000)); // slower than the cadence
      inFlight -= 1;
      return 1;
    });
    const poller = new Poller(fetchOnce, { intervalMs: 2000, onResult: () => {} });
    poller.start();
    await vi.advanceTimersByTimeAsync(9000);
    poller.stop();
    expect(maxInFlight).toBe(1);
  });

  it("backs off exponentially on failure and reports the retry delay", async () => {
    const fetchOnce = vi.fn(async () => {
      throw new Error("connection refused");
    });
    const delays: number[] = [];
    const poller = new Poller(fetchOnce, {
      intervalMs: 2000,
      maxBackoffMs: 10000,
      onResult: () => {},
      onError: (_err, next) => delays.push(next),
    });
    poller.start();
    await vi.advanceTimersByTimeAsync(40000);
    poller.stop();
    expect(delays.slice(0, 4)).toEqual([4000, 8000, 10000, 10000]);
  });

  it("recovers the base cadence after a success", async () => {
    let calls = 0;
    const fetchOnce = vi.fn(async () => {
      calls += 1;
      if (calls <= 2) throw new Error("down");
      return "up";
    });
    const poller = new Poller(fetchOnce, { intervalMs: 2000, onResult: () => {} });
    poller.start();
    await vi.advanceTimersByTimeAsync(30000);
    expect(poller.currentDelay()).toBe(2000);
    poller.stop();
  });

  it("stops cleanly: no callbacks after stop", async () => {
    const onResult = vi.fn();
    const poller = new Poller(async () => 1, { intervalMs: 2000, onResult });
    poller.start();
    await vi.advanceTimersByTimeAsync(100);
    poller.stop();
    const count = onResult.mock.calls.length;
    await vi.advanceTimersByTimeAsync(10000);
    expect(onResult).toHaveBeenCalledTimes(count);
  });
});
