/** Editor state: the working mask at native resolution, zoom, tool, a
 * bounded snapshot undo stack, and the timed click trail.
 *
 * Zoom only affects the display mapping; every edit lands on the native
 * mask. Undo restores bit-exact snapshots taken at the start of each
 * gesture (strokes count as one gesture from pointer-down to pointer-up). */

import {
  MaskGrid,
  Point,
  cloneMaskData,
  createMask,
  fillPolygon,
  stampDisk,
} from "./mask.js";

export type Tool = "brush" | "eraser" | "polygon";

export const MIN_ZOOM = 1;
export const MAX_ZOOM = 8;
export const UNDO_LIMIT = 64; // spec floor is 20 steps

export class BadScaleError extends Error {}
export class EmptyUndoStackError extends Error {}

export interface ClickRecord {
  t: number; // ms since session start
  x: number; // native-resolution pixels
  y: number;
  tool: Tool;
  button: number;
}

export class MaskEditor {
  readonly mask: MaskGrid;
  zoom = 1;
  tool: Tool = "brush";
  brushRadius = 2;

  private undoStack: Uint8Array[] = [];
  private clicks: ClickRecord[] = [];
  private strokeOpen = false;
  private lastTimestamp = 0;
  private readonly clock: () => number;

  constructor(width: number, height: number, clock: () => number) {
    this.mask = createMask(width, height);
    this.clock = clock;
  }

  /** Display coordinates -> native pixel (integer zoom block mapping). */
  displayToNative(dx: number, dy: number): Point {
    return { x: Math.floor(dx / this.zoom), y: Math.floor(dy / this.zoom) };
  }

  setZoom(k: number): void {
    if (!Number.isInteger(k) || k < MIN_ZOOM || k > MAX_ZOOM) {
      throw new BadScaleError(`zoom must be an integer in ${MIN_ZOOM}..${MAX_ZOOM}, got ${k}`);
    }
    this.zoom = k;
  }

  /** Snapshot for undo; one per gesture (no-op while a stroke is open). */
  beginGesture(): void {
    if (this.strokeOpen) return;
    this.undoStack.push(cloneMaskData(this.mask));
    if (this.undoStack.length > UNDO_LIMIT) {
      this.undoStack.shift();
    }
    this.strokeOpen = true;
  }

  endGesture(): void {
    this.strokeOpen = false;
  }

  /** Brush/eraser stamp at native coords; out-of-bounds clips, the click
   * trail records the event with a monotone session-relative timestamp. */
  applyBrush(x: number, y: number, button = 0): void {
    this.beginGesture();
    const value: 0 | 1 = this.tool === "eraser" ? 0 : 1;
    stampDisk(this.mask, x, y, this.brushRadius, value);
    this.recordClick(x, y, this.tool === "eraser" ? "eraser" : "brush", button);
  }

  /** Even-odd fill of a closed polygon (its own undo step). */
  closePolygon(vertices: Point[], button = 0): void {
    this.beginGesture();
    try {
      fillPolygon(this.mask, vertices, 1);
    } catch (err) {
      // Nothing was drawn; drop the snapshot we just pushed.
      this.undoStack.pop();
      this.strokeOpen = false;
      throw err;
    }
    for (const v of vertices) {
      this.recordClick(Math.floor(v.x), Math.floor(v.y), "polygon", button);
    }
    this.endGesture();
  }

  undo(): void {
    const prev = this.undoStack.pop();
    if (prev === undefined) {
      throw new EmptyUndoStackError("nothing to undo");
    }
    this.mask.data.set(prev);
    this.strokeOpen = false;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  maskCopy(): Uint8Array {
    return cloneMaskData(this.mask);
  }

  /** Take the buffered clicks, leaving the buffer empty. */
  drainClicks(): ClickRecord[] {
    const out = this.clicks;
    this.clicks = [];
    return out;
  }

  peekClicks(): readonly ClickRecord[] {
    return this.clicks;
  }

  private recordClick(x: number, y: number, tool: Tool, button: number): void {
    const now = Math.max(Math.round(this.clock()), this.lastTimestamp);
    this.lastTimestamp = now;
    this.clicks.push({ t: now, x, y, tool, button });
  }
}
