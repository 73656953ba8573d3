/** Stroke-to-hint serialization.
 *
 * A stroke's velocity is its on-screen vector divided by the frame
 * span, so with the default span of 30 an arrow moves content its own
 * length per second at 30 fps. Serialization uses a fixed key order
 * ({mask, hints, speed} / {x, y, dx, dy}) so re-serializing the same
 * strokes is byte-for-byte stable.
 */

import type { Hint, HintStroke, HintsDocument } from "./types.js";

export const DEFAULT_FRAMES_SPAN = 30;

export function strokeToHint(stroke: HintStroke): Hint {
  const span = stroke.framesSpan > 0 ? stroke.framesSpan : DEFAULT_FRAMES_SPAN;
  return {
    x: stroke.start.x,
    y: stroke.start.y,
    dx: (stroke.end.x - stroke.start.x) / span,
    dy: (stroke.end.y - stroke.start.y) / span,
  };
}

export function strokesToHints(strokes: HintStroke[]): Hint[] {
  if (strokes.length === 0) {
    throw new Error("no strokes to serialize");
  }
  return strokes.map(strokeToHint);
}

export function buildHintsDocument(
  maskRef: string,
  strokes: HintStroke[],
  speed: number,
): HintsDocument {
  return { mask: maskRef, hints: strokesToHints(strokes), speed };
}

export function serializeHints(document: HintsDocument): string {
  // Rebuild literals so key order is fixed regardless of caller objects.
  const hints = document.hints.map((h) => ({ x: h.x, y: h.y, dx: h.dx, dy: h.dy }));
  return JSON.stringify({ mask: document.mask, hints, speed: document.speed });
}

/**
 * Client-side guard mirroring the server's 422s: the stroke must start
 * inside the image and inside the painted mask.
 */
export function strokeError(
  stroke: HintStroke,
  width: number,
  height: number,
  maskTest: (x: number, y: number) => boolean,
): string | null {
  const { x, y } = stroke.start;
  if (x < 0 || y < 0 || x > width - 1 || y > height - 1) {
    return `stroke starts outside the image (${x.toFixed(1)}, ${y.toFixed(1)})`;
  }
  if (!maskTest(Math.round(x), Math.round(y))) {
    return "stroke must start inside the painted mask";
  }
  return null;
}
