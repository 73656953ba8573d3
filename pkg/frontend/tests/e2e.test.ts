/**
 * End-to-end smoke against a running service. Skipped unless
 * SERVICE_URL points at `cinema3d serve` (see frontend/README.md):
 * upload fixtures, paint-free mask + one stroke, submit motion, and
 * check the preview content hashes (t=0 equals t=N: loop closure).
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { buildHintsDocument, serializeHints } from "../src/hints.js";
import type { MotionSummary } from "../src/types.js";

const SERVICE_URL = process.env.SERVICE_URL ?? "";

const fixture = (name: string): Buffer =>
  readFileSync(fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url)));

describe.skipIf(!SERVICE_URL)("service round trip", () => {
  it("upload -> hints -> preview hashes match across the loop", async () => {
    const form = new FormData();
    form.append("image", new Blob([fixture("image.png")], { type: "image/png" }), "image.png");
    form.append("depth", new Blob([fixture("depth.pfm")]), "depth.pfm");
    const created = await fetch(`${SERVICE_URL}/sessions`, { method: "POST", body: form });
    expect(created.status).toBe(201);
    const { id } = (await created.json()) as { id: string };

    const maskUri = `data:image/png;base64,${fixture("mask.png").toString("base64")}`;
    const document = buildHintsDocument(
      maskUri,
      [{ start: { x: 12, y: 12 }, end: { x: 24, y: 12 }, framesSpan: 30 }],
      1.0,
    );
    const motion = await fetch(`${SERVICE_URL}/sessions/${id}/motion`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: serializeHints(document),
    });
    expect(motion.status).toBe(200);
    const summary = (await motion.json()) as MotionSummary;
    expect(summary.motion_revision).toBe(1);
    expect(summary.max_magnitude).toBeGreaterThan(0);

    const preview = (t: number) =>
      fetch(`${SERVICE_URL}/sessions/${id}/preview`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ t, N: 8 }),
      });

    const first = await preview(0);
    expect(first.status).toBe(200);
    expect(first.headers.get("content-type")).toBe("image/png");
    const firstHash = first.headers.get("x-content-hash");
    expect(firstHash).toBeTruthy();

    // Determinism: the same request returns identical bytes.
    const repeat = await preview(0);
    expect(repeat.headers.get("x-content-hash")).toBe(firstHash);

    // Loop closure surfaced over HTTP: t = N matches t = 0.
    const last = await preview(8);
    expect(last.headers.get("x-content-hash")).toBe(firstHash);
  }, 60000);
});
