/** Browser authoring tool: paint a motion mask, draw velocity arrows,
 * pick a camera move, and scrub server-rendered loop frames.
 *
 * Every displayed pixel comes from the service; the client only edits
 * inputs and caches responses.
 */

import { ServiceClient, ApiError } from "./api.js";
import { buildHintsDocument, serializeHints, strokeError, DEFAULT_FRAMES_SPAN } from "./hints.js";
import { MaskRaster } from "./mask.js";
import { PreviewController } from "./preview.js";
import type { HintStroke, PresetCamera, TrajectoryPreset } from "./types.js";

type Tool = "paint" | "erase" | "arrow";

interface AppState {
  sessionId: string | null;
  width: number;
  height: number;
  mask: MaskRaster | null;
  strokes: HintStroke[];
  tool: Tool;
  brushRadius: number;
  framesSpan: number;
  speed: number;
  preset: TrajectoryPreset;
  amplitude: number;
  frames: number;
  playhead: number;
  motionRevision: number;
  playing: boolean;
}

const state: AppState = {
  sessionId: null,
  width: 0,
  height: 0,
  mask: null,
  strokes: [],
  tool: "paint",
  brushRadius: 14,
  framesSpan: DEFAULT_FRAMES_SPAN,
  speed: 1.0,
  preset: "sway",
  amplitude: 0.05,
  frames: 30,
  playhead: 0,
  motionRevision: 0,
  playing: false,
};

const client = new ServiceClient("");

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const imageCanvas = element<HTMLCanvasElement>("image-canvas");
const maskCanvas = element<HTMLCanvasElement>("mask-canvas");
const strokeCanvas = element<HTMLCanvasElement>("stroke-canvas");
const previewImage = element<HTMLImageElement>("preview-image");
const toastBox = element<HTMLDivElement>("toast");
const scrubber = element<HTMLInputElement>("scrubber");
const statusLine = element<HTMLSpanElement>("status");

let previewUrl: string | null = null;

const previews = new PreviewController(
  (request, signal) => {
    if (!state.sessionId) return Promise.reject(new Error("no session"));
    return client.previewFrame(state.sessionId, request, signal);
  },
  {
    onFrame: (frame) => {
      if (previewUrl) URL.revokeObjectURL(previewUrl);
      previewUrl = URL.createObjectURL(new Blob([frame.bytes], { type: "image/png" }));
      previewImage.src = previewUrl;
      statusLine.textContent = `frame ${state.playhead}/${state.frames} · ${frame.hash.slice(0, 8)}`;
    },
    onError: (error) => toast(error.message),
  },
);

function toast(message: string): void {
  toastBox.textContent = message;
  toastBox.classList.add("visible");
  setTimeout(() => toastBox.classList.remove("visible"), 4000);
}

function canvasPoint(event: PointerEvent): { x: number; y: number } {
  const rect = strokeCanvas.getBoundingClientRect();
  return {
    x: ((event.clientX - rect.left) / rect.width) * state.width,
    y: ((event.clientY - rect.top) / rect.height) * state.height,
  };
}

function redrawMask(): void {
  if (!state.mask) return;
  const ctx = maskCanvas.getContext("2d")!;
  const image = new ImageData(state.mask.toOverlayRgba(), state.width, state.height);
  ctx.putImageData(image, 0, 0);
}

function redrawStrokes(): void {
  const ctx = strokeCanvas.getContext("2d")!;
  ctx.clearRect(0, 0, state.width, state.height);
  ctx.strokeStyle = "#ffd23f";
  ctx.fillStyle = "#ffd23f";
  ctx.lineWidth = Math.max(1.5, state.width / 200);
  for (const stroke of state.strokes) {
    drawArrow(ctx, stroke);
  }
}

function drawArrow(ctx: CanvasRenderingContext2D, stroke: HintStroke): void {
  const { start, end } = stroke;
  ctx.beginPath();
  ctx.moveTo(start.x, start.y);
  ctx.lineTo(end.x, end.y);
  ctx.stroke();
  const angle = Math.atan2(end.y - start.y, end.x - start.x);
  const head = Math.max(4, state.width / 60);
  ctx.beginPath();
  ctx.moveTo(end.x, end.y);
  ctx.lineTo(end.x - head * Math.cos(angle - 0.45), end.y - head * Math.sin(angle - 0.45));
  ctx.lineTo(end.x - head * Math.cos(angle + 0.45), end.y - head * Math.sin(angle + 0.45));
  ctx.closePath();
  ctx.fill();
  ctx.beginPath();
  ctx.arc(start.x, start.y, head / 2.5, 0, 2 * Math.PI);
  ctx.fill();
}

async function handleUpload(): Promise<void> {
  const imageInput = element<HTMLInputElement>("image-file");
  const depthInput = element<HTMLInputElement>("depth-file");
  const imageBlob = imageInput.files?.[0];
  const depthBlob = depthInput.files?.[0];
  if (!imageBlob || !depthBlob) {
    toast("choose an image PNG and a depth file first");
    return;
  }
  try {
    state.sessionId = await client.createSession(imageBlob, depthBlob);
  } catch (error) {
    toast(error instanceof ApiError ? error.message : String(error));
    return;
  }
  const bitmap = await createImageBitmap(imageBlob);
  state.width = bitmap.width;
  state.height = bitmap.height;
  state.mask = new MaskRaster(bitmap.width, bitmap.height);
  state.strokes = [];
  state.motionRevision = 0;
  for (const canvas of [imageCanvas, maskCanvas, strokeCanvas]) {
    canvas.width = bitmap.width;
    canvas.height = bitmap.height;
  }
  imageCanvas.getContext("2d")!.drawImage(bitmap, 0, 0);
  redrawMask();
  redrawStrokes();
  element<HTMLDivElement>("editor").classList.remove("disabled");
  statusLine.textContent = `session ${state.sessionId.slice(0, 8)} · ${state.width}x${state.height}`;
}

function maskToDataUri(): string {
  const mask = state.mask!;
  const offscreen = document.createElement("canvas");
  offscreen.width = state.width;
  offscreen.height = state.height;
  const ctx = offscreen.getContext("2d")!;
  ctx.putImageData(new ImageData(mask.toExportRgba(), state.width, state.height), 0, 0);
  return offscreen.toDataURL("image/png");
}

async function submitMotion(): Promise<void> {
  if (!state.sessionId || !state.mask) return;
  if (state.strokes.length === 0) {
    toast("draw at least one arrow inside the mask");
    return;
  }
  if (!state.mask.hasAny()) {
    toast("paint an animation mask first");
    return;
  }
  const document_ = buildHintsDocument(maskToDataUri(), state.strokes, state.speed);
  try {
    const summary = await client.setMotion(state.sessionId, serializeHints(document_));
    state.motionRevision = summary.motion_revision;
    statusLine.textContent =
      `motion rev ${summary.motion_revision} · |M| mean ${summary.mean_magnitude.toFixed(2)} ` +
      `max ${summary.max_magnitude.toFixed(2)} px/frame`;
    requestPreview();
  } catch (error) {
    toast(error instanceof ApiError ? error.message : String(error));
  }
}

function currentCamera(): PresetCamera {
  return {
    preset: state.preset,
    amplitude: state.amplitude,
    phase: state.frames > 0 ? (state.playhead % state.frames) / state.frames : 0,
  };
}

function requestPreview(): void {
  if (!state.sessionId || state.motionRevision === 0) return;
  previews.request({
    motionRevision: state.motionRevision,
    t: state.playhead,
    N: state.frames,
    camera: currentCamera(),
  });
}

function setPlayhead(value: number): void {
  state.playhead = Math.max(0, Math.min(state.frames, value));
  scrubber.value = String(state.playhead);
  requestPreview();
}

async function startRenderJob(): Promise<void> {
  if (!state.sessionId || state.motionRevision === 0) {
    toast("set motion before rendering");
    return;
  }
  try {
    const jobId = await client.startRender(state.sessionId, {
      N: state.frames,
      trajectory: state.preset,
      amplitude: state.amplitude,
    });
    statusLine.textContent = `render job ${jobId} started`;
    const poll = setInterval(async () => {
      const status = await client.jobStatus(jobId);
      statusLine.textContent = `render job: ${status.frames.length}/${state.frames} frames`;
      if (status.done) {
        clearInterval(poll);
        if (status.error) {
          toast(`render failed: ${status.error}`);
        } else {
          statusLine.textContent = `render done: ${status.frames.length} frames`;
          const links = element<HTMLDivElement>("job-links");
          links.innerHTML = "";
          status.frames.forEach((path, index) => {
            const anchor = document.createElement("a");
            anchor.href = client.frameUrl(path);
            anchor.textContent = String(index);
            anchor.target = "_blank";
            links.appendChild(anchor);
          });
        }
      }
    }, 500);
  } catch (error) {
    toast(error instanceof ApiError ? error.message : String(error));
  }
}

function wirePointerHandlers(): void {
  let painting = false;
  let arrowStart: { x: number; y: number } | null = null;

  strokeCanvas.addEventListener("pointerdown", (event) => {
    if (!state.mask) return;
    const point = canvasPoint(event);
    strokeCanvas.setPointerCapture(event.pointerId);
    if (state.tool === "arrow") {
      arrowStart = point;
    } else {
      painting = true;
      state.mask.paint(
        point.x,
        point.y,
        state.brushRadius,
        state.tool === "erase" ? -0.8 : 0.6,
      );
      redrawMask();
    }
  });

  strokeCanvas.addEventListener("pointermove", (event) => {
    if (!state.mask) return;
    const point = canvasPoint(event);
    if (painting) {
      state.mask.paint(
        point.x,
        point.y,
        state.brushRadius,
        state.tool === "erase" ? -0.8 : 0.6,
      );
      redrawMask();
    } else if (arrowStart) {
      redrawStrokes();
      const ctx = strokeCanvas.getContext("2d")!;
      drawArrow(ctx, { start: arrowStart, end: point, framesSpan: state.framesSpan });
    }
  });

  strokeCanvas.addEventListener("pointerup", (event) => {
    if (!state.mask) return;
    if (painting) {
      painting = false;
      return;
    }
    if (arrowStart) {
      const stroke: HintStroke = {
        start: arrowStart,
        end: canvasPoint(event),
        framesSpan: state.framesSpan,
      };
      arrowStart = null;
      const problem = strokeError(stroke, state.width, state.height, (x, y) =>
        state.mask!.isInside(x, y),
      );
      if (problem) {
        toast(problem);
        redrawStrokes();
        return;
      }
      state.strokes.push(stroke);
      redrawStrokes();
    }
  });
}

function wireControls(): void {
  element<HTMLButtonElement>("upload-button").addEventListener("click", () => {
    void handleUpload();
  });
  element<HTMLButtonElement>("motion-button").addEventListener("click", () => {
    void submitMotion();
  });
  element<HTMLButtonElement>("render-button").addEventListener("click", () => {
    void startRenderJob();
  });
  element<HTMLButtonElement>("clear-strokes").addEventListener("click", () => {
    state.strokes = [];
    redrawStrokes();
  });
  element<HTMLButtonElement>("clear-mask").addEventListener("click", () => {
    state.mask?.clear();
    redrawMask();
  });

  for (const tool of ["paint", "erase", "arrow"] as Tool[]) {
    element<HTMLInputElement>(`tool-${tool}`).addEventListener("change", () => {
      state.tool = tool;
    });
  }
  element<HTMLInputElement>("brush-size").addEventListener("input", (event) => {
    state.brushRadius = Number((event.target as HTMLInputElement).value);
  });
  element<HTMLInputElement>("frames-span").addEventListener("change", (event) => {
    state.framesSpan = Math.max(1, Number((event.target as HTMLInputElement).value));
  });
  element<HTMLInputElement>("speed").addEventListener("change", (event) => {
    state.speed = Math.max(0.01, Number((event.target as HTMLInputElement).value));
  });
  element<HTMLSelectElement>("trajectory").addEventListener("change", (event) => {
    state.preset = (event.target as HTMLSelectElement).value as TrajectoryPreset;
    requestPreview();
  });
  element<HTMLInputElement>("amplitude").addEventListener("change", (event) => {
    state.amplitude = Number((event.target as HTMLInputElement).value);
    requestPreview();
  });
  element<HTMLInputElement>("loop-frames").addEventListener("change", (event) => {
    state.frames = Math.max(1, Number((event.target as HTMLInputElement).value));
    scrubber.max = String(state.frames);
    setPlayhead(Math.min(state.playhead, state.frames));
  });
  scrubber.addEventListener("input", () => setPlayhead(Number(scrubber.value)));

  const playButton = element<HTMLButtonElement>("play-button");
  let playTimer: ReturnType<typeof setInterval> | null = null;
  playButton.addEventListener("click", () => {
    state.playing = !state.playing;
    playButton.textContent = state.playing ? "pause" : "play";
    if (state.playing) {
      playTimer = setInterval(() => setPlayhead((state.playhead + 1) % state.frames), 1000 / 15);
    } else if (playTimer) {
      clearInterval(playTimer);
      playTimer = null;
    }
  });
}

wirePointerHandlers();
wireControls();
scrubber.max = String(state.frames);
