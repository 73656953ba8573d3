/** Debounced, cached, latest-wins preview fetching.
 *
 * Frames are keyed by (motion revision, t, camera); a key is fetched
 * at most once and scrubbing replays cached frames without touching
 * the network. At most one request is in flight: starting a newer one
 * aborts the older, and stale responses are dropped.
 */

import type { PresetCamera, PreviewRequest } from "./types.js";

export interface PreviewFrame {
  bytes: ArrayBuffer;
  hash: string;
}

export type PreviewFetcher = (
  request: PreviewRequest,
  signal: AbortSignal,
) => Promise<PreviewFrame>;

export interface PreviewQuery {
  motionRevision: number;
  t: number;
  N: number;
  camera?: PresetCamera;
}

export function previewKey(query: PreviewQuery): string {
  const camera = query.camera
    ? `${query.camera.preset}:${query.camera.amplitude}:${query.camera.phase}`
    : "source";
  return `${query.motionRevision}|${query.t}|${query.N}|${camera}`;
}

export interface PreviewCallbacks {
  onFrame: (frame: PreviewFrame, query: PreviewQuery) => void;
  onError?: (error: Error) => void;
}

export class PreviewController {
  fetchCount = 0;

  private readonly cache = new Map<string, PreviewFrame>();
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight: AbortController | null = null;
  private latestKey = "";

  constructor(
    private readonly fetcher: PreviewFetcher,
    private readonly callbacks: PreviewCallbacks,
    private readonly debounceMs = 250,
  ) {}

  cached(query: PreviewQuery): PreviewFrame | undefined {
    return this.cache.get(previewKey(query));
  }

  /** Ask for a frame; fires after the debounce window unless cached. */
  request(query: PreviewQuery): void {
    const key = previewKey(query);
    this.latestKey = key;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    const hit = this.cache.get(key);
    if (hit) {
      this.callbacks.onFrame(hit, query);
      return;
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire(key, query);
    }, this.debounceMs);
  }

  private async fire(key: string, query: PreviewQuery): Promise<void> {
    if (key !== this.latestKey) return; // superseded while debouncing
    if (this.inFlight) {
      this.inFlight.abort();
    }
    const controller = new AbortController();
    this.inFlight = controller;
    this.fetchCount += 1;
    try {
      const request: PreviewRequest = { t: query.t, N: query.N };
      if (query.camera) request.camera = query.camera;
      const frame = await this.fetcher(request, controller.signal);
      this.cache.set(key, frame);
      if (key === this.latestKey) {
        this.callbacks.onFrame(frame, query);
      }
    } catch (error) {
      if (controller.signal.aborted) return; // superseded: stay quiet
      this.callbacks.onError?.(error instanceof Error ? error : new Error(String(error)));
    } finally {
      if (this.inFlight === controller) {
        this.inFlight = null;
      }
    }
  }
}
