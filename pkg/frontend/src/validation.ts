/**
 * Client-side submission validation.
 *
 * Mirrors the service's rules exactly so a draft is accepted locally iff
 * the POST would be accepted: point submissions need exactly 5 points per
 * class, in bounds, no duplicate coordinates; squiggle submissions need at
 * least one stroke per class, every vertex in bounds, radius >= 0.
 */

export const POINTS_PER_CLASS = 5;

export interface ValidationResult {
  ok: boolean;
  error?: string;
  path?: string;
}

const OK: ValidationResult = { ok: true };

function fail(error: string, path: string): ValidationResult {
  return { ok: false, error, path };
}

function isInt(value: unknown): value is number {
  return typeof value === "number" && Number.isInteger(value);
}

// RFC 3339 with a mandatory offset; mirrors the service's parser.
const RFC3339 =
  /^\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d{1,6})?([Zz]|[+-]\d{2}:\d{2}(:\d{2})?)$/;

export function isRfc3339(text: unknown): boolean {
  if (typeof text !== "string" || !RFC3339.test(text)) {
    return false;
  }
  const normalized = text.replace(/[zZ]$/, "+00:00").replace(" ", "T");
  return !Number.isNaN(Date.parse(normalized));
}

function validatePoints(entries: unknown, height: number, width: number): ValidationResult {
  if (!Array.isArray(entries) || entries.length === 0) {
    return fail("points: must be a non-empty list", "/points");
  }
  const counts: Record<number, number> = { 0: 0, 1: 0 };
  const seen = new Set<string>();
  for (let i = 0; i < entries.length; i++) {
    const entry = entries[i];
    if (!Array.isArray(entry) || entry.length !== 3 || !entry.every(isInt)) {
      return fail(`points: entry ${i} must be a [row, col, class] triple`, `/points/${i}`);
    }
    const classId = (entry as [number, number, number])[2];
    if (classId !== 0 && classId !== 1) {
      return fail(`points: entry ${i} class must be 0 or 1`, `/points/${i}`);
    }
    counts[classId] += 1;
  }
  for (const classId of [1, 0]) {
    if (counts[classId] !== POINTS_PER_CLASS) {
      return fail(
        `points: class ${classId} count ${counts[classId]}, expected ${POINTS_PER_CLASS}`,
        "/points"
      );
    }
  }
  for (let i = 0; i < entries.length; i++) {
    const [row, col] = entries[i] as [number, number, number];
    const key = `${row},${col}`;
    if (seen.has(key)) {
      return fail(`points: duplicate coordinate (${row}, ${col})`, "/points");
    }
    seen.add(key);
    if (row < 0 || row >= height || col < 0 || col >= width) {
      return fail(`points: point (${row}, ${col}) outside ${height}x${width} raster`, "/points");
    }
  }
  return OK;
}

function validateStrokes(entries: unknown, height: number, width: number): ValidationResult {
  if (!Array.isArray(entries) || entries.length === 0) {
    return fail("strokes: must be a non-empty list", "/strokes");
  }
  const present = new Set<number>();
  for (let i = 0; i < entries.length; i++) {
    const stroke = entries[i];
    if (typeof stroke !== "object" || stroke === null || Array.isArray(stroke)) {
      return fail(`strokes: stroke ${i} must be an object`, `/strokes/${i}`);
    }
    const { class: classId, radius, polyline } = stroke as Record<string, unknown>;
    if (!isInt(classId) || (classId !== 0 && classId !== 1)) {
      return fail(`strokes: stroke ${i} class must be 0 or 1`, `/strokes/${i}`);
    }
    if (!isInt(radius) || radius < 0) {
      return fail(`strokes: stroke ${i} radius must be >= 0`, `/strokes/${i}`);
    }
    if (!Array.isArray(polyline) || polyline.length === 0) {
      return fail(`strokes: stroke ${i} needs at least one vertex`, `/strokes/${i}`);
    }
    for (let j = 0; j < polyline.length; j++) {
      const vertex = polyline[j];
      if (!Array.isArray(vertex) || vertex.length !== 2 || !vertex.every(isInt)) {
        return fail(
          `strokes: stroke ${i} vertex ${j} must be a [row, col] pair`,
          `/strokes/${i}/polyline/${j}`
        );
      }
      const [row, col] = vertex as [number, number];
      if (row < 0 || row >= height || col < 0 || col >= width) {
        return fail(`strokes: vertex (${row}, ${col}) out of bounds`, "/strokes");
      }
    }
    present.add(classId);
  }
  if (!present.has(1)) {
    return fail("strokes: missing ship stroke", "/strokes");
  }
  if (!present.has(0)) {
    return fail("strokes: missing background stroke", "/strokes");
  }
  return OK;
}

/** Validate a full request body against image dimensions [height, width]. */
export function validateSubmission(
  body: Record<string, unknown>,
  height: number,
  width: number
): ValidationResult {
  if (typeof body.image_id !== "string" || body.image_id.length === 0) {
    return fail("image_id: must be a non-empty string", "/image_id");
  }
  if (typeof body.annotator_id !== "string" || body.annotator_id.length === 0) {
    return fail("annotator_id: must be a non-empty string", "/annotator_id");
  }
  if (body.scheme !== "point_n10" && body.scheme !== "squiggle_n32") {
    return fail("scheme: must be point_n10 or squiggle_n32", "/scheme");
  }
  if (!isRfc3339(body.created_at)) {
    return fail("created_at: not an RFC 3339 timestamp", "/created_at");
  }
  if (body.scheme === "point_n10") {
    if (body.points === undefined || body.points === null) {
      return fail("points: required for the point scheme", "/points");
    }
    if (body.strokes !== undefined && body.strokes !== null) {
      return fail("strokes: not allowed for the point scheme", "/strokes");
    }
    return validatePoints(body.points, height, width);
  }
  if (body.strokes === undefined || body.strokes === null) {
    return fail("strokes: required for the squiggle scheme", "/strokes");
  }
  if (body.points !== undefined && body.points !== null) {
    return fail("points: not allowed for the squiggle scheme", "/points");
  }
  return validateStrokes(body.strokes, height, width);
}
