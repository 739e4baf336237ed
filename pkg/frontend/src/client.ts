/** REST client for the annotation service; mirrors its endpoints exactly. */

import type { ClickRecord } from "./editor.js";

export interface ImageEntry {
  id: string;
  status: "pending" | "done";
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(`${status}: ${message}`);
  }
}

async function ensureOk(response: Response): Promise<Response> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.error === "string") detail = body.error;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response;
}

export function formatClickBatch(clicks: readonly ClickRecord[]): string {
  return clicks.map((c) => `${c.t} ${c.x} ${c.y} ${c.tool} ${c.button}`).join("\n") + (clicks.length ? "\n" : "");
}

export class AnnotatorClient {
  constructor(private readonly baseUrl: string) {}

  async listImages(): Promise<ImageEntry[]> {
    const r = await ensureOk(await fetch(`${this.baseUrl}/images`));
    return (await r.json()) as ImageEntry[];
  }

  imageUrl(id: string, scale: number): string {
    return `${this.baseUrl}/images/${encodeURIComponent(id)}?scale=${scale}`;
  }

  async getImage(id: string, scale = 1): Promise<Uint8Array> {
    const r = await ensureOk(await fetch(this.imageUrl(id, scale)));
    return new Uint8Array(await r.arrayBuffer());
  }

  async putMask(id: string, png: Uint8Array): Promise<void> {
    await ensureOk(
      await fetch(`${this.baseUrl}/images/${encodeURIComponent(id)}/mask`, {
        method: "PUT",
        headers: { "content-type": "image/png" },
        body: png as BodyInit,
      }),
    );
  }

  async getMask(id: string): Promise<Uint8Array> {
    const r = await ensureOk(await fetch(`${this.baseUrl}/images/${encodeURIComponent(id)}/mask`));
    return new Uint8Array(await r.arrayBuffer());
  }

  async postClicks(id: string, clicks: readonly ClickRecord[]): Promise<number> {
    if (clicks.length === 0) return 0;
    const r = await ensureOk(
      await fetch(`${this.baseUrl}/images/${encodeURIComponent(id)}/clicks`, {
        method: "POST",
        headers: { "content-type": "text/plain" },
        body: formatClickBatch(clicks),
      }),
    );
    const body = (await r.json()) as { appended: number };
    return body.appended;
  }

  async exportStore(outDir: string): Promise<number> {
    const r = await ensureOk(
      await fetch(`${this.baseUrl}/export`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ out_dir: outDir }),
      }),
    );
    const body = (await r.json()) as { count: number };
    return body.count;
  }
}
