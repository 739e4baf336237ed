/** Canvas wiring for the mask editor: image underlay, mask overlay at 50%
 * opacity, pointer handling for brush/eraser strokes and polygon clicks. */

import { AnnotatorClient } from "./client.js";
import { BadScaleError, EmptyUndoStackError, Tool } from "./editor.js";
import type { Point } from "./mask.js";
import { AnnotationSession } from "./session.js";

const OVERLAY_COLOR: [number, number, number] = [255, 64, 64];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

class App {
  private readonly client = new AnnotatorClient("");
  private readonly session = new AnnotationSession(this.client);
  private readonly canvas = el<HTMLCanvasElement>("canvas");
  private readonly status = el<HTMLSpanElement>("status");
  private image: HTMLImageElement | null = null;
  private drawing = false;
  private polygonBuffer: Point[] = [];

  async start(): Promise<void> {
    this.bindControls();
    const id = await this.session.advance();
    await this.showCurrent(id);
  }

  private bindControls(): void {
    for (const tool of ["brush", "eraser", "polygon"] as Tool[]) {
      el<HTMLButtonElement>(`tool-${tool}`).onclick = () => {
        if (this.session.editor) this.session.editor.tool = tool;
        this.polygonBuffer = [];
        this.render();
      };
    }
    el<HTMLInputElement>("radius").oninput = (e) => {
      const editor = this.session.editor;
      if (editor) editor.brushRadius = Number((e.target as HTMLInputElement).value);
    };
    el<HTMLInputElement>("zoom").oninput = (e) => {
      const editor = this.session.editor;
      if (!editor) return;
      try {
        editor.setZoom(Number((e.target as HTMLInputElement).value));
      } catch (err) {
        if (!(err instanceof BadScaleError)) throw err;
        return;
      }
      void this.reloadImage().then(() => this.render());
    };
    el<HTMLButtonElement>("undo").onclick = () => {
      const editor = this.session.editor;
      if (!editor) return;
      try {
        editor.undo();
      } catch (err) {
        if (!(err instanceof EmptyUndoStackError)) throw err;
      }
      this.render();
    };
    el<HTMLButtonElement>("close-polygon").onclick = () => {
      const editor = this.session.editor;
      if (!editor || this.polygonBuffer.length < 3) return;
      editor.closePolygon(this.polygonBuffer);
      this.polygonBuffer = [];
      this.render();
    };
    el<HTMLButtonElement>("submit").onclick = () => void this.submit();

    this.canvas.onpointerdown = (e) => this.pointer(e, true);
    this.canvas.onpointermove = (e) => {
      if (this.drawing) this.pointer(e, false);
    };
    this.canvas.onpointerup = () => {
      this.drawing = false;
      this.session.editor?.endGesture();
    };
  }

  private pointer(e: PointerEvent, isDown: boolean): void {
    const editor = this.session.editor;
    if (!editor || this.session.submitting) return;
    const rect = this.canvas.getBoundingClientRect();
    const { x, y } = editor.displayToNative(e.clientX - rect.left, e.clientY - rect.top);
    if (editor.tool === "polygon") {
      if (isDown) this.polygonBuffer.push({ x, y });
    } else {
      this.drawing = true;
      editor.applyBrush(x, y, e.button);
    }
    this.render();
  }

  private async submit(): Promise<void> {
    if (!this.session.editor || this.session.submitting) return;
    this.status.textContent = "submitting...";
    try {
      const nextId = await this.session.submit();
      await this.showCurrent(nextId);
    } catch (err) {
      this.status.textContent = `submit failed: ${err}`;
    }
  }

  private async showCurrent(id: string | null): Promise<void> {
    this.polygonBuffer = [];
    if (id === null) {
      this.status.textContent = "all images annotated";
      const ctx = this.canvas.getContext("2d")!;
      ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
      return;
    }
    this.status.textContent = `annotating ${id}`;
    await this.reloadImage();
    this.render();
  }

  private reloadImage(): Promise<void> {
    const editor = this.session.editor;
    const id = this.session.currentId;
    if (!editor || id === null) return Promise.resolve();
    return new Promise((resolve, reject) => {
      const img = new Image();
      img.onload = () => {
        this.image = img;
        resolve();
      };
      img.onerror = () => reject(new Error("image load failed"));
      img.src = this.client.imageUrl(id, editor.zoom);
    });
  }

  private render(): void {
    const editor = this.session.editor;
    if (!editor || !this.image) return;
    const { width, height } = editor.mask;
    const z = editor.zoom;
    this.canvas.width = width * z;
    this.canvas.height = height * z;
    const ctx = this.canvas.getContext("2d")!;
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(this.image, 0, 0);
    const overlay = ctx.getImageData(0, 0, width * z, height * z);
    const [or, og, ob] = OVERLAY_COLOR;
    for (let y = 0; y < height * z; y++) {
      const my = Math.floor(y / z);
      for (let x = 0; x < width * z; x++) {
        if (editor.mask.data[my * width + Math.floor(x / z)]) {
          const o = (y * width * z + x) * 4;
          overlay.data[o] = (overlay.data[o] + or) >> 1;
          overlay.data[o + 1] = (overlay.data[o + 1] + og) >> 1;
          overlay.data[o + 2] = (overlay.data[o + 2] + ob) >> 1;
        }
      }
    }
    ctx.putImageData(overlay, 0, 0);
  }
}

window.addEventListener("DOMContentLoaded", () => {
  void new App().start();
});
