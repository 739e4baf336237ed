import { describe, expect, it } from "vitest";

import {
  BadScaleError,
  EmptyUndoStackError,
  MaskEditor,
  UNDO_LIMIT,
} from "../src/editor.js";
import { masksEqual } from "../src/mask.js";

function makeEditor(w = 16, h = 16): { editor: MaskEditor; tick: (ms: number) => void } {
  let now = 0;
  const editor = new MaskEditor(w, h, () => now);
  return { editor, tick: (ms) => (now += ms) };
}

describe("brush and eraser", () => {
  it("radius 0 sets a single pixel", () => {
    const { editor } = makeEditor();
    editor.brushRadius = 0;
    editor.applyBrush(5, 6);
    expect(editor.mask.data[6 * 16 + 5]).toBe(1);
    expect(editor.mask.data.reduce((a, b) => a + b, 0)).toBe(1);
  });

  it("brush then eraser restores the spot", () => {
    const { editor } = makeEditor();
    const before = editor.maskCopy();
    editor.applyBrush(8, 8);
    editor.endGesture();
    editor.tool = "eraser";
    editor.applyBrush(8, 8);
    expect(masksEqual(editor.maskCopy(), before)).toBe(true);
  });

  it("out-of-bounds strokes clip instead of throwing", () => {
    const { editor } = makeEditor(8, 8);
    editor.applyBrush(-1, 3);
    editor.applyBrush(7, 7);
    expect(editor.mask.data[7 * 8 + 7]).toBe(1);
  });
});

describe("zoom", () => {
  it("maps display coords at zoom 4 back to native pixels", () => {
    const { editor } = makeEditor();
    editor.setZoom(4);
    expect(editor.displayToNative(4 * 5, 4 * 9)).toEqual({ x: 5, y: 9 });
    expect(editor.displayToNative(4 * 5 + 3, 4 * 9 + 3)).toEqual({ x: 5, y: 9 });
  });

  it("rejects zooms outside 1..8", () => {
    const { editor } = makeEditor();
    expect(() => editor.setZoom(0)).toThrow(BadScaleError);
    expect(() => editor.setZoom(9)).toThrow(BadScaleError);
    expect(() => editor.setZoom(2.5)).toThrow(BadScaleError);
  });

  it("zoom changes never touch the mask", () => {
    const { editor } = makeEditor();
    editor.applyBrush(4, 4);
    const snapshot = editor.maskCopy();
    editor.setZoom(8);
    editor.setZoom(1);
    expect(masksEqual(editor.maskCopy(), snapshot)).toBe(true);
  });
});

describe("undo", () => {
  it("draw then undo restores the empty mask", () => {
    const { editor } = makeEditor();
    editor.applyBrush(3, 3);
    editor.endGesture();
    editor.undo();
    expect(editor.mask.data.every((v) => v === 0)).toBe(true);
  });

  it("a multi-stamp stroke undoes as one step", () => {
    const { editor } = makeEditor();
    editor.applyBrush(2, 2);
    editor.applyBrush(3, 2);
    editor.applyBrush(4, 2);
    editor.endGesture();
    expect(editor.undoDepth).toBe(1);
    editor.undo();
    expect(editor.mask.data.every((v) => v === 0)).toBe(true);
  });

  it("polygon then undo restores the prior mask bit-exact", () => {
    const { editor } = makeEditor();
    editor.applyBrush(1, 1);
    editor.endGesture();
    const prior = editor.maskCopy();
    editor.closePolygon([
      { x: 4, y: 4 },
      { x: 12, y: 4 },
      { x: 8, y: 12 },
    ]);
    expect(masksEqual(editor.maskCopy(), prior)).toBe(false);
    editor.undo();
    expect(masksEqual(editor.maskCopy(), prior)).toBe(true);
  });

  it("empty stack raises", () => {
    const { editor } = makeEditor();
    expect(() => editor.undo()).toThrow(EmptyUndoStackError);
  });

  it("stack is bounded but keeps at least 20 steps", () => {
    const { editor } = makeEditor();
    for (let i = 0; i < UNDO_LIMIT + 10; i++) {
      editor.applyBrush(i % 16, 1);
      editor.endGesture();
    }
    expect(editor.undoDepth).toBe(UNDO_LIMIT);
    expect(UNDO_LIMIT).toBeGreaterThanOrEqual(20);
  });

  it("degenerate polygon leaves mask and undo stack untouched", () => {
    const { editor } = makeEditor();
    editor.applyBrush(1, 1);
    editor.endGesture();
    const depth = editor.undoDepth;
    const snapshot = editor.maskCopy();
    expect(() => editor.closePolygon([{ x: 0, y: 0 }, { x: 5, y: 5 }])).toThrow();
    expect(editor.undoDepth).toBe(depth);
    expect(masksEqual(editor.maskCopy(), snapshot)).toBe(true);
  });
});

describe("click trail", () => {
  it("timestamps are session-relative and non-decreasing", () => {
    const { editor, tick } = makeEditor();
    editor.applyBrush(1, 1);
    tick(40);
    editor.applyBrush(2, 1);
    tick(-100); // a clock going backwards must not regress the trail
    editor.applyBrush(3, 1);
    const clicks = editor.peekClicks();
    expect(clicks.length).toBe(3);
    expect(clicks[0].t).toBe(0);
    expect(clicks[1].t).toBe(40);
    expect(clicks[2].t).toBe(40);
    for (let i = 1; i < clicks.length; i++) {
      expect(clicks[i].t).toBeGreaterThanOrEqual(clicks[i - 1].t);
    }
  });

  it("records tool and native coordinates", () => {
    const { editor } = makeEditor();
    editor.setZoom(4);
    const { x, y } = editor.displayToNative(20, 36);
    editor.applyBrush(x, y);
    editor.tool = "eraser";
    editor.applyBrush(x, y, 2);
    const clicks = editor.drainClicks();
    expect(clicks[0]).toMatchObject({ x: 5, y: 9, tool: "brush", button: 0 });
    expect(clicks[1]).toMatchObject({ x: 5, y: 9, tool: "eraser", button: 2 });
    expect(editor.peekClicks().length).toBe(0);
  });
});
