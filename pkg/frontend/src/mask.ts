/** Binary mask primitives: a flat row-major Uint8Array of 0/1 values at the
 * image's native resolution, plus the brush and polygon rasterizers. */

export interface MaskGrid {
  width: number;
  height: number;
  data: Uint8Array; // row-major, values 0 | 1
}

export class DegeneratePolygonError extends Error {}

export function createMask(width: number, height: number): MaskGrid {
  if (width < 1 || height < 1) {
    throw new Error(`bad mask dimensions ${width}x${height}`);
  }
  return { width, height, data: new Uint8Array(width * height) };
}

export function cloneMaskData(mask: MaskGrid): Uint8Array {
  return mask.data.slice();
}

export function masksEqual(a: Uint8Array, b: Uint8Array): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) {
    if (a[i] !== b[i]) return false;
  }
  return true;
}

/** Stamp a filled disk of the given radius; out-of-bounds pixels are
 * clipped. Radius 0 touches exactly one pixel. */
export function stampDisk(
  mask: MaskGrid,
  cx: number,
  cy: number,
  radius: number,
  value: 0 | 1,
): void {
  const r = Math.max(0, Math.floor(radius));
  const r2 = r * r;
  const y0 = Math.max(0, cy - r);
  const y1 = Math.min(mask.height - 1, cy + r);
  const x0 = Math.max(0, cx - r);
  const x1 = Math.min(mask.width - 1, cx + r);
  for (let y = y0; y <= y1; y++) {
    const dy = y - cy;
    for (let x = x0; x <= x1; x++) {
      const dx = x - cx;
      if (dx * dx + dy * dy <= r2) {
        mask.data[y * mask.width + x] = value;
      }
    }
  }
}

export interface Point {
  x: number;
  y: number;
}

/** Fill the polygon interior into the mask using the even-odd rule tested
 * at pixel centers. Needs at least 3 vertices. */
export function fillPolygon(mask: MaskGrid, vertices: Point[], value: 0 | 1 = 1): void {
  if (vertices.length < 3) {
    throw new DegeneratePolygonError(`polygon needs >= 3 vertices, got ${vertices.length}`);
  }
  const n = vertices.length;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const v of vertices) {
    minY = Math.min(minY, v.y);
    maxY = Math.max(maxY, v.y);
  }
  const yStart = Math.max(0, Math.floor(minY));
  const yEnd = Math.min(mask.height - 1, Math.ceil(maxY));
  for (let y = yStart; y <= yEnd; y++) {
    const py = y + 0.5;
    for (let x = 0; x < mask.width; x++) {
      const px = x + 0.5;
      let inside = false;
      for (let i = 0, j = n - 1; i < n; j = i++) {
        const a = vertices[i];
        const b = vertices[j];
        if (a.y > py !== b.y > py) {
          const crossX = ((b.x - a.x) * (py - a.y)) / (b.y - a.y) + a.x;
          if (px < crossX) inside = !inside;
        }
      }
      if (inside) {
        mask.data[y * mask.width + x] = value;
      }
    }
  }
}
