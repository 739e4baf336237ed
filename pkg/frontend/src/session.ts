/** Annotation workflow: walk the pending images, one editor per image,
 * submit mask + click trail, advance. Editing is disabled while a submit
 * is in flight so the uploaded mask and trail cannot diverge. */

import { AnnotatorClient } from "./client.js";
import { MaskEditor } from "./editor.js";
import { encodeMaskPng, pngDimensions } from "./png.js";

export class AnnotationSession {
  editor: MaskEditor | null = null;
  currentId: string | null = null;
  submitting = false;

  private readonly client: AnnotatorClient;
  private readonly sessionStart: number;
  private readonly now: () => number;

  constructor(client: AnnotatorClient, now: () => number = () => Date.now()) {
    this.client = client;
    this.now = now;
    this.sessionStart = now();
  }

  private clock = (): number => this.now() - this.sessionStart;

  /** Load the next pending image (or null when everything is done). */
  async advance(): Promise<string | null> {
    const entries = await this.client.listImages();
    const next = entries.find((e) => e.status === "pending");
    if (!next) {
      this.editor = null;
      this.currentId = null;
      return null;
    }
    const png = await this.client.getImage(next.id, 1);
    const { width, height } = pngDimensions(png);
    this.editor = new MaskEditor(width, height, this.clock);
    this.currentId = next.id;
    return next.id;
  }

  /** Upload the working mask bit-exact, flush the click buffer, move on. */
  async submit(): Promise<string | null> {
    if (!this.editor || this.currentId === null) {
      throw new Error("no image loaded");
    }
    if (this.submitting) {
      throw new Error("submit already in progress");
    }
    this.submitting = true;
    try {
      const id = this.currentId;
      await this.client.putMask(id, encodeMaskPng(this.editor.mask));
      await this.client.postClicks(id, this.editor.drainClicks());
      return await this.advance();
    } finally {
      this.submitting = false;
    }
  }
}
