/**
 * In-progress annotation state for one image.
 *
 * Point mode collects exactly 5 points per class before submission is
 * allowed; squiggle mode needs at least one stroke per class. The undo
 * stack pops exactly one placement or one stroke, newest first.
 */

import {
  AnnotationBody,
  BACKGROUND,
  ClassId,
  DraftPoint,
  DraftStroke,
  Mode,
  SHIP,
} from "./types.js";
import { POINTS_PER_CLASS } from "./validation.js";

export const STROKE_RADIUS = 1;

export class AnnotationDraft {
  mode: Mode = "point";
  activeClass: ClassId = SHIP;
  points: DraftPoint[] = [];
  strokes: DraftStroke[] = [];
  private history: ("point" | "stroke")[] = [];
  private pending: [number, number][] | null = null;

  constructor(
    readonly imageId: string,
    readonly height: number,
    readonly width: number
  ) {}

  setMode(mode: Mode): void {
    this.mode = mode;
  }

  toggleClass(): void {
    this.activeClass = this.activeClass === SHIP ? BACKGROUND : SHIP;
  }

  counts(): { ship: number; background: number } {
    let ship = 0;
    for (const p of this.points) {
      if (p.classId === SHIP) ship++;
    }
    return { ship, background: this.points.length - ship };
  }

  /** Place a point at an integer pixel; refused when out of bounds, on a
   * duplicate coordinate, or once the active class already has its 5. */
  placePoint(row: number, col: number): boolean {
    if (this.mode !== "point") return false;
    if (row < 0 || row >= this.height || col < 0 || col >= this.width) return false;
    if (this.points.some((p) => p.row === row && p.col === col)) return false;
    const counts = this.counts();
    const mine = this.activeClass === SHIP ? counts.ship : counts.background;
    if (mine >= POINTS_PER_CLASS) return false;
    this.points.push({ row, col, classId: this.activeClass });
    this.history.push("point");
    return true;
  }

  beginStroke(row: number, col: number): boolean {
    if (this.mode !== "squiggle" || this.pending !== null) return false;
    if (row < 0 || row >= this.height || col < 0 || col >= this.width) return false;
    this.pending = [[row, col]];
    return true;
  }

  /** Extend the in-progress stroke; consecutive identical pixels dedupe. */
  extendStroke(row: number, col: number): void {
    if (this.pending === null) return;
    if (row < 0 || row >= this.height || col < 0 || col >= this.width) return;
    const last = this.pending[this.pending.length - 1];
    if (last[0] === row && last[1] === col) return;
    this.pending.push([row, col]);
  }

  endStroke(): boolean {
    if (this.pending === null) return false;
    this.strokes.push({
      classId: this.activeClass,
      radius: STROKE_RADIUS,
      polyline: this.pending,
    });
    this.pending = null;
    this.history.push("stroke");
    return true;
  }

  strokeInProgress(): [number, number][] | null {
    return this.pending;
  }

  /** Pop exactly one placement or stroke, newest first. */
  undo(): boolean {
    if (this.pending !== null) {
      this.pending = null;
      return true;
    }
    const kind = this.history.pop();
    if (kind === "point") {
      this.points.pop();
      return true;
    }
    if (kind === "stroke") {
      this.strokes.pop();
      return true;
    }
    return false;
  }

  canSubmit(): boolean {
    if (this.mode === "point") {
      const counts = this.counts();
      return counts.ship === POINTS_PER_CLASS && counts.background === POINTS_PER_CLASS;
    }
    const present = new Set(this.strokes.map((s) => s.classId));
    return present.has(SHIP) && present.has(BACKGROUND);
  }

  toBody(annotatorId: string, createdAt: string): AnnotationBody {
    if (this.mode === "point") {
      return {
        image_id: this.imageId,
        annotator_id: annotatorId,
        scheme: "point_n10",
        created_at: createdAt,
        points: this.points.map((p) => [p.row, p.col, p.classId]),
      };
    }
    return {
      image_id: this.imageId,
      annotator_id: annotatorId,
      scheme: "squiggle_n32",
      created_at: createdAt,
      strokes: this.strokes.map((s) => ({
        class: s.classId,
        radius: s.radius,
        polyline: s.polyline,
      })),
    };
  }
}
