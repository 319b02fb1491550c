/**
 * Canvas annotation tool.
 *
 * Left click places points (point mode) or draws squiggles (squiggle
 * mode) in the active class. Wheel zooms about the cursor, middle-drag
 * pans. Keys: c toggles class, m toggles mode, z undoes, Enter submits.
 */

import { AnnotationApi } from "./api.js";
import { AnnotationDraft } from "./draft.js";
import { BACKGROUND, ImageInfo, SHIP } from "./types.js";
import { validateSubmission } from "./validation.js";
import {
  Viewport,
  identityViewport,
  imageToScreen,
  panBy,
  screenToPixel,
  zoomAt,
} from "./viewport.js";

const CLASS_COLORS: Record<number, string> = {
  [SHIP]: "#ff5252",
  [BACKGROUND]: "#40c4ff",
};

class App {
  private api = new AnnotationApi();
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private statusLine: HTMLElement;
  private counterLine: HTMLElement;
  private errorBanner: HTMLElement;
  private submitButton: HTMLButtonElement;
  private viewport: Viewport = identityViewport();
  private image: HTMLImageElement | null = null;
  private info: ImageInfo | null = null;
  private draft: AnnotationDraft | null = null;
  private drawing = false;
  private panning: { x: number; y: number } | null = null;
  private inFlight = false;

  constructor() {
    this.canvas = document.getElementById("canvas") as HTMLCanvasElement;
    this.ctx = this.canvas.getContext("2d")!;
    this.statusLine = document.getElementById("status")!;
    this.counterLine = document.getElementById("counter")!;
    this.errorBanner = document.getElementById("error")!;
    this.submitButton = document.getElementById("submit") as HTMLButtonElement;
    this.bind();
  }

  async start(): Promise<void> {
    await this.loadNextUnlabeled();
  }

  private async loadNextUnlabeled(): Promise<void> {
    const unlabeled = await this.api.listImages("unlabeled");
    if (unlabeled.length === 0) {
      this.statusLine.textContent = "All images annotated.";
      this.info = null;
      this.draft = null;
      this.render();
      return;
    }
    await this.loadImage(unlabeled[0]);
  }

  private loadImage(info: ImageInfo): Promise<void> {
    this.info = info;
    this.draft = new AnnotationDraft(info.image_id, info.dimensions[0], info.dimensions[1]);
    this.viewport = identityViewport();
    this.errorBanner.textContent = "";
    return new Promise((resolve) => {
      const img = new Image();
      img.onload = () => {
        this.image = img;
        const fit = Math.min(
          this.canvas.width / img.width,
          this.canvas.height / img.height
        );
        this.viewport = { zoom: fit, panX: 0, panY: 0 };
        this.render();
        resolve();
      };
      img.onerror = () => {
        this.errorBanner.textContent = `failed to load ${info.image_id}; click to retry`;
        this.errorBanner.onclick = () => {
          this.errorBanner.onclick = null;
          void this.loadImage(info);
        };
        resolve();
      };
      img.src = this.api.rasterUrl(info.image_id);
    });
  }

  private bind(): void {
    this.canvas.addEventListener("mousedown", (e) => {
      if (e.button === 1) {
        this.panning = { x: e.offsetX, y: e.offsetY };
        e.preventDefault();
        return;
      }
      if (e.button !== 0 || !this.draft) return;
      const pixel = this.pixelAt(e);
      if (!pixel) return;
      if (this.draft.mode === "point") {
        this.draft.placePoint(pixel.row, pixel.col);
      } else if (this.draft.beginStroke(pixel.row, pixel.col)) {
        this.drawing = true;
      }
      this.render();
    });
    this.canvas.addEventListener("mousemove", (e) => {
      if (this.panning) {
        this.viewport = panBy(this.viewport, e.offsetX - this.panning.x, e.offsetY - this.panning.y);
        this.panning = { x: e.offsetX, y: e.offsetY };
        this.render();
        return;
      }
      if (!this.drawing || !this.draft) return;
      const pixel = this.pixelAt(e);
      if (pixel) {
        this.draft.extendStroke(pixel.row, pixel.col);
        this.render();
      }
    });
    const finishStroke = () => {
      if (this.drawing && this.draft) {
        this.draft.endStroke();
        this.drawing = false;
        this.render();
      }
      this.panning = null;
    };
    this.canvas.addEventListener("mouseup", finishStroke);
    this.canvas.addEventListener("mouseleave", finishStroke);
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      const factor = e.deltaY < 0 ? 1.2 : 1 / 1.2;
      this.viewport = zoomAt(this.viewport, e.offsetX, e.offsetY, factor);
      this.render();
    });
    window.addEventListener("keydown", (e) => {
      if (!this.draft) return;
      if (e.key === "c") this.draft.toggleClass();
      else if (e.key === "m") this.draft.setMode(this.draft.mode === "point" ? "squiggle" : "point");
      else if (e.key === "z" || e.key === "u") this.draft.undo();
      else if (e.key === "Enter") void this.submit();
      else return;
      this.render();
    });
    this.submitButton.addEventListener("click", () => void this.submit());
  }

  private pixelAt(e: MouseEvent): { row: number; col: number } | null {
    if (!this.info) return null;
    return screenToPixel(
      this.viewport,
      e.offsetX,
      e.offsetY,
      this.info.dimensions[0],
      this.info.dimensions[1]
    );
  }

  private async submit(): Promise<void> {
    if (!this.draft || !this.info || this.inFlight || !this.draft.canSubmit()) return;
    const body = this.draft.toBody("web", new Date().toISOString());
    const local = validateSubmission(
      body as unknown as Record<string, unknown>,
      this.info.dimensions[0],
      this.info.dimensions[1]
    );
    if (!local.ok) {
      this.errorBanner.textContent = `${local.error}`;
      return;
    }
    this.inFlight = true;
    try {
      await this.api.submit(body);
      await this.loadNextUnlabeled();
      const progress = await this.api.progress();
      this.statusLine.textContent =
        `point ${progress.point_done}/${progress.total}, squiggle ${progress.squiggle_done}/${progress.total}`;
    } catch (err) {
      const apiErr = err as { error?: string };
      this.errorBanner.textContent = apiErr.error ?? String(err);
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  private render(): void {
    this.ctx.fillStyle = "#111";
    this.ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    if (this.image) {
      this.ctx.imageSmoothingEnabled = false;
      this.ctx.drawImage(
        this.image,
        this.viewport.panX,
        this.viewport.panY,
        this.image.width * this.viewport.zoom,
        this.image.height * this.viewport.zoom
      );
    }
    if (this.draft) {
      for (const point of this.draft.points) {
        const { x, y } = imageToScreen(this.viewport, point.row, point.col);
        this.ctx.strokeStyle = CLASS_COLORS[point.classId];
        this.ctx.lineWidth = 2;
        this.ctx.beginPath();
        this.ctx.arc(x, y, 5, 0, 2 * Math.PI);
        this.ctx.stroke();
      }
      const strokes = [...this.draft.strokes];
      const pending = this.draft.strokeInProgress();
      if (pending) {
        strokes.push({ classId: this.draft.activeClass, radius: 1, polyline: pending });
      }
      for (const stroke of strokes) {
        this.ctx.strokeStyle = CLASS_COLORS[stroke.classId];
        this.ctx.lineWidth = Math.max(2, (2 * stroke.radius + 1) * this.viewport.zoom);
        this.ctx.lineCap = "round";
        this.ctx.beginPath();
        stroke.polyline.forEach(([row, col], i) => {
          const { x, y } = imageToScreen(this.viewport, row, col);
          if (i === 0) this.ctx.moveTo(x, y);
          else this.ctx.lineTo(x, y);
        });
        this.ctx.stroke();
      }
      const counts = this.draft.counts();
      const cls = this.draft.activeClass === SHIP ? "ship" : "background";
      this.counterLine.textContent =
        this.draft.mode === "point"
          ? `mode point | class ${cls} | ship ${counts.ship}/5, background ${counts.background}/5`
          : `mode squiggle | class ${cls} | strokes ${this.draft.strokes.length}`;
      this.submitButton.disabled = !this.draft.canSubmit();
      if (this.info) {
        this.statusLine.textContent = `annotating ${this.info.image_id}`;
      }
    } else {
      this.counterLine.textContent = "";
      this.submitButton.disabled = true;
    }
  }
}

new App().start();
