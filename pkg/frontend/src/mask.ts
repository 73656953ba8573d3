/** Soft-brush mask raster, thresholded to binary at export.
 *
 * The engine consumes binary masks only; painting accumulates soft
 * coverage in [0, 1] for a forgiving brush feel and the export cuts at
 * 0.5. Pure typed-array math, no canvas dependency, so it is testable
 * outside the browser.
 */

export class MaskRaster {
  readonly width: number;
  readonly height: number;
  readonly values: Float32Array;

  constructor(width: number, height: number) {
    if (width <= 0 || height <= 0) {
      throw new Error(`mask raster needs positive dimensions, got ${width}x${height}`);
    }
    this.width = width;
    this.height = height;
    this.values = new Float32Array(width * height);
  }

  /** Additive round brush with a quadratic falloff; negative strength erases. */
  paint(cx: number, cy: number, radius: number, strength = 0.6): void {
    const r = Math.max(1, radius);
    const x0 = Math.max(0, Math.floor(cx - r));
    const x1 = Math.min(this.width - 1, Math.ceil(cx + r));
    const y0 = Math.max(0, Math.floor(cy - r));
    const y1 = Math.min(this.height - 1, Math.ceil(cy + r));
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        const d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        if (d2 > r * r) continue;
        const falloff = 1 - d2 / (r * r);
        const index = y * this.width + x;
        const next = this.values[index] + strength * falloff;
        this.values[index] = Math.min(1, Math.max(0, next));
      }
    }
  }

  isInside(x: number, y: number, cutoff = 0.5): boolean {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return false;
    return this.values[y * this.width + x] >= cutoff;
  }

  hasAny(cutoff = 0.5): boolean {
    for (let i = 0; i < this.values.length; i++) {
      if (this.values[i] >= cutoff) return true;
    }
    return false;
  }

  clear(): void {
    this.values.fill(0);
  }

  /** Binary 0/1 per pixel at the export cutoff. */
  toBinary(cutoff = 0.5): Uint8Array {
    const out = new Uint8Array(this.values.length);
    for (let i = 0; i < this.values.length; i++) {
      out[i] = this.values[i] >= cutoff ? 1 : 0;
    }
    return out;
  }

  /** Grayscale RGBA bytes of the binary mask (0 or 255), for PNG export. */
  toExportRgba(cutoff = 0.5): Uint8ClampedArray<ArrayBuffer> {
    const out = new Uint8ClampedArray(this.values.length * 4);
    for (let i = 0; i < this.values.length; i++) {
      const v = this.values[i] >= cutoff ? 255 : 0;
      out[i * 4] = v;
      out[i * 4 + 1] = v;
      out[i * 4 + 2] = v;
      out[i * 4 + 3] = 255;
    }
    return out;
  }

  /** Red overlay visualization with soft alpha, for the editing canvas. */
  toOverlayRgba(): Uint8ClampedArray<ArrayBuffer> {
    const out = new Uint8ClampedArray(this.values.length * 4);
    for (let i = 0; i < this.values.length; i++) {
      out[i * 4] = 255;
      out[i * 4 + 1] = 64;
      out[i * 4 + 2] = 32;
      out[i * 4 + 3] = Math.round(150 * this.values[i]);
    }
    return out;
  }
}
