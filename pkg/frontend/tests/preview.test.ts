import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { PreviewController, previewKey } from "../src/preview.js";
import type { PreviewFrame } from "../src/preview.js";

function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (error: Error) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

const frameFor = (tag: string): PreviewFrame => ({
  bytes: new TextEncoder().encode(tag).buffer as ArrayBuffer,
  hash: tag,
});

const query = (t: number, motionRevision = 1) => ({
  motionRevision,
  t,
  N: 8,
  camera: { preset: "sway" as const, amplitude: 0.05, phase: t / 8 },
});

describe("PreviewController", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("debounces a burst of requests into one fetch", async () => {
    const calls: number[] = [];
    const controller = new PreviewController(
      async (request) => {
        calls.push(request.t);
        return frameFor(`t${request.t}`);
      },
      { onFrame: () => {} },
    );
    controller.request(query(1));
    vi.advanceTimersByTime(100);
    controller.request(query(2));
    vi.advanceTimersByTime(100);
    controller.request(query(3));
    vi.advanceTimersByTime(249);
    expect(calls).toEqual([]);
    await vi.advanceTimersByTimeAsync(2);
    expect(calls).toEqual([3]);
    expect(controller.fetchCount).toBe(1);
  });

  it("serves repeats from the cache: one request per distinct key", async () => {
    const frames: string[] = [];
    const controller = new PreviewController(
      async (request) => frameFor(`t${request.t}`),
      { onFrame: (frame) => frames.push(frame.hash) },
    );
    controller.request(query(1));
    await vi.advanceTimersByTimeAsync(260);
    controller.request(query(2));
    await vi.advanceTimersByTimeAsync(260);
    controller.request(query(1)); // cache hit: no debounce, no fetch
    expect(frames).toEqual(["t1", "t2", "t1"]);
    expect(controller.fetchCount).toBe(2);
  });

  it("busts the cache when the motion revision changes", async () => {
    const controller = new PreviewController(
      async (request) => frameFor(`t${request.t}`),
      { onFrame: () => {} },
    );
    controller.request(query(1, 1));
    await vi.advanceTimersByTimeAsync(260);
    controller.request(query(1, 2));
    await vi.advanceTimersByTimeAsync(260);
    expect(controller.fetchCount).toBe(2);
    expect(previewKey(query(1, 1))).not.toBe(previewKey(query(1, 2)));
  });

  it("delivers only the latest result (latest wins)", async () => {
    const slow = deferred<PreviewFrame>();
    const delivered: string[] = [];
    let call = 0;
    const controller = new PreviewController(
      async (request, signal) => {
        call += 1;
        if (call === 1) {
          signal.addEventListener("abort", () =>
            slow.reject(new Error("aborted")),
          );
          return slow.promise;
        }
        return frameFor(`t${request.t}`);
      },
      { onFrame: (frame) => delivered.push(frame.hash) },
    );
    controller.request(query(1));
    await vi.advanceTimersByTimeAsync(260); // first fetch hangs
    controller.request(query(2));
    await vi.advanceTimersByTimeAsync(260);
    slow.resolve(frameFor("t1-stale"));
    await Promise.resolve();
    expect(delivered).toEqual(["t2"]);
  });

  it("surfaces fetch failures through onError without crashing", async () => {
    const errors: string[] = [];
    const controller = new PreviewController(
      async () => {
        throw new Error("service down");
      },
      { onFrame: () => {}, onError: (error) => errors.push(error.message) },
    );
    controller.request(query(4));
    await vi.advanceTimersByTimeAsync(260);
    expect(errors).toEqual(["service down"]);
  });
});
