import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { describe, expect, it } from "vitest";

import { validateSubmission } from "../src/validation.js";

interface CorpusEntry {
  body: Record<string, unknown>;
  height: number;
  width: number;
  server_status: number;
  server_accepts: boolean;
}

const fixtureDir = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const corpus: CorpusEntry[] = JSON.parse(
  readFileSync(join(fixtureDir, "validation_corpus.json"), "utf-8")
);

describe("validation conformance against the service", () => {
  it("loads the full generated corpus", () => {
    expect(corpus.length).toBe(200);
    expect(corpus.some((e) => e.server_accepts)).toBe(true);
    expect(corpus.some((e) => !e.server_accepts)).toBe(true);
  });

  it("makes identical accept/reject decisions on all 200 drafts", () => {
    const mismatches: string[] = [];
    for (const [index, entry] of corpus.entries()) {
      const verdict = validateSubmission(entry.body, entry.height, entry.width);
      if (verdict.ok !== entry.server_accepts) {
        mismatches.push(
          `#${index}: client ${verdict.ok ? "accepts" : `rejects (${verdict.error})`} ` +
            `but server ${entry.server_accepts ? "accepts" : `rejects (${entry.server_status})`}`
        );
      }
    }
    expect(mismatches).toEqual([]);
  });
});

describe("validation specifics", () => {
  const base = {
    image_id: "img",
    annotator_id: "a",
    scheme: "point_n10",
    created_at: "2026-08-10T12:00:00Z",
  };

  it("requires exactly five points per class", () => {
    const points = [
      [0, 0, 1], [1, 1, 1], [2, 2, 1], [3, 3, 1],
      [5, 5, 0], [6, 6, 0], [7, 7, 0], [8, 8, 0], [9, 9, 0],
    ];
    const result = validateSubmission({ ...base, points }, 16, 16);
    expect(result.ok).toBe(false);
    expect(result.error).toContain("class 1 count 4");
  });

  it("rejects duplicate coordinates", () => {
    const points = [
      [0, 0, 1], [0, 0, 1], [2, 2, 1], [3, 3, 1], [4, 4, 1],
      [5, 5, 0], [6, 6, 0], [7, 7, 0], [8, 8, 0], [9, 9, 0],
    ];
    expect(validateSubmission({ ...base, points }, 16, 16).ok).toBe(false);
  });

  it("requires one stroke per class for squiggles", () => {
    const body = {
      ...base,
      scheme: "squiggle_n32",
      strokes: [{ class: 0, radius: 1, polyline: [[1, 1], [2, 2]] }],
    };
    const result = validateSubmission(body, 16, 16);
    expect(result.ok).toBe(false);
    expect(result.error).toContain("ship");
  });
});
