/** Typed client for the authoring service. All rendering happens
 * server-side; the UI only moves bytes. */

import type {
  HintsDocument,
  JobStatus,
  MotionSummary,
  PreviewRequest,
} from "./types.js";
import type { PreviewFrame } from "./preview.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let message = `${response.status}`;
  try {
    const body = (await response.json()) as { message?: string };
    if (body.message) message = body.message;
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(response.status, message);
}

export class ServiceClient {
  constructor(private readonly baseUrl = "") {}

  async createSession(image: Blob, depth: Blob): Promise<string> {
    const form = new FormData();
    form.append("image", image, "image.png");
    form.append("depth", depth, "depth.pfm");
    const response = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: form,
    });
    await raiseForStatus(response);
    const body = (await response.json()) as { id: string };
    return body.id;
  }

  async setMotion(sessionId: string, payload: string | HintsDocument): Promise<MotionSummary> {
    const body = typeof payload === "string" ? payload : JSON.stringify(payload);
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/motion`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body,
    });
    await raiseForStatus(response);
    return (await response.json()) as MotionSummary;
  }

  async previewFrame(
    sessionId: string,
    request: PreviewRequest,
    signal?: AbortSignal,
  ): Promise<PreviewFrame> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/preview`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
      signal: signal ?? null,
    });
    await raiseForStatus(response);
    const bytes = await response.arrayBuffer();
    const hash = response.headers.get("x-content-hash") ?? "";
    return { bytes, hash };
  }

  async startRender(
    sessionId: string,
    options: { N: number; trajectory: string; amplitude: number },
  ): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/render`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(options),
    });
    await raiseForStatus(response);
    const body = (await response.json()) as { job: string };
    return body.job;
  }

  async jobStatus(jobId: string): Promise<JobStatus> {
    const response = await fetch(`${this.baseUrl}/jobs/${jobId}`);
    await raiseForStatus(response);
    return (await response.json()) as JobStatus;
  }

  frameUrl(path: string): string {
    return `${this.baseUrl}${path}`;
  }
}
