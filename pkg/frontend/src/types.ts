export type ClassId = 0 | 1;

export const BACKGROUND: ClassId = 0;
export const SHIP: ClassId = 1;

export type Mode = "point" | "squiggle";

export interface DraftPoint {
  row: number;
  col: number;
  classId: ClassId;
}

export interface DraftStroke {
  classId: ClassId;
  radius: number;
  polyline: [number, number][];
}

/** Request body for POST /api/annotations. */
export interface AnnotationBody {
  image_id: string;
  annotator_id: string;
  scheme: "point_n10" | "squiggle_n32";
  created_at: string;
  points?: [number, number, number][];
  strokes?: { class: number; radius: number; polyline: [number, number][] }[];
}

export interface ImageInfo {
  image_id: string;
  status: "unlabeled" | "point_done" | "squiggle_done";
  dimensions: [number, number]; // [height, width]
}

export interface SubmitResult {
  accepted: boolean;
  version: number;
}

export interface Progress {
  total: number;
  point_done: number;
  squiggle_done: number;
}
