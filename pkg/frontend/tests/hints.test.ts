import { describe, expect, it } from "vitest";

import {
  buildHintsDocument,
  serializeHints,
  strokeError,
  strokesToHints,
  strokeToHint,
} from "../src/hints.js";
import type { HintStroke } from "../src/types.js";

const stroke = (x0: number, y0: number, x1: number, y1: number, span = 30): HintStroke => ({
  start: { x: x0, y: y0 },
  end: { x: x1, y: y1 },
  framesSpan: span,
});

describe("strokeToHint", () => {
  it("divides the stroke vector by the frame span", () => {
    expect(strokeToHint(stroke(10, 10, 40, 10))).toEqual({ x: 10, y: 10, dx: 1, dy: 0 });
  });

  it("keeps zero-length strokes as still pins", () => {
    expect(strokeToHint(stroke(5, 7, 5, 7))).toEqual({ x: 5, y: 7, dx: 0, dy: 0 });
  });

  it("honors a custom span", () => {
    expect(strokeToHint(stroke(0, 0, 10, -20, 10))).toEqual({ x: 0, y: 0, dx: 1, dy: -2 });
  });
});

describe("strokesToHints", () => {
  it("rejects an empty stroke list", () => {
    expect(() => strokesToHints([])).toThrow(/no strokes/);
  });
});

describe("serializeHints", () => {
  it("matches the documented schema byte for byte", () => {
    const document = buildHintsDocument(
      "mask.png",
      [stroke(10, 10, 40, 10), stroke(96, 64, 96, 34, 30)],
      1.5,
    );
    expect(serializeHints(document)).toBe(
      '{"mask":"mask.png","hints":[{"x":10,"y":10,"dx":1,"dy":0},' +
        '{"x":96,"y":64,"dx":0,"dy":-1}],"speed":1.5}',
    );
  });

  it("re-serializes identically (round trip without lossy transforms)", () => {
    const document = buildHintsDocument("data:image/png;base64,AAAA", [stroke(1, 2, 4, 8)], 1);
    const first = serializeHints(document);
    const reparsed = JSON.parse(first);
    expect(serializeHints(reparsed)).toBe(first);
  });
});

describe("strokeError", () => {
  const insideAll = () => true;

  it("accepts strokes starting inside image and mask", () => {
    expect(strokeError(stroke(3, 3, 9, 9), 16, 16, insideAll)).toBeNull();
  });

  it("rejects strokes starting outside the image", () => {
    expect(strokeError(stroke(-2, 3, 5, 5), 16, 16, insideAll)).toMatch(/outside the image/);
    expect(strokeError(stroke(20, 3, 5, 5), 16, 16, insideAll)).toMatch(/outside the image/);
  });

  it("rejects strokes starting outside the mask (mirrors the server 422)", () => {
    expect(strokeError(stroke(3, 3, 9, 9), 16, 16, () => false)).toMatch(/inside the painted mask/);
  });
});
