/** Thin typed client for the annotation service API. */

import { AnnotationBody, ImageInfo, Progress, SubmitResult } from "./types.js";

export interface ApiError {
  status: number;
  error: string;
  path: string;
}

export class AnnotationApi {
  constructor(private base: string = "") {}

  async listImages(status?: string): Promise<ImageInfo[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    const resp = await fetch(`${this.base}/api/images${query}`);
    if (!resp.ok) throw await this.toError(resp);
    return resp.json();
  }

  rasterUrl(imageId: string): string {
    return `${this.base}/api/images/${encodeURIComponent(imageId)}/raster`;
  }

  async submit(body: AnnotationBody): Promise<SubmitResult> {
    const resp = await fetch(`${this.base}/api/annotations`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await this.toError(resp);
    return resp.json();
  }

  async progress(): Promise<Progress> {
    const resp = await fetch(`${this.base}/api/progress`);
    if (!resp.ok) throw await this.toError(resp);
    return resp.json();
  }

  private async toError(resp: Response): Promise<ApiError> {
    let error = resp.statusText;
    let path = "";
    try {
      const doc = await resp.json();
      if (typeof doc.error === "string") error = doc.error;
      if (typeof doc.path === "string") path = doc.path;
    } catch {
      // non-JSON error body; keep the status text
    }
    return { status: resp.status, error, path };
  }
}
