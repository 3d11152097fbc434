import { describe, expect, it } from "vitest";
import { GLYPH_STYLES, glyphFor } from "../src/style.js";
import type { ForceKind } from "../src/types.js";

const KINDS: ForceKind[] = ["Proposition", "Clarification", "Evaluation", "Validation"];

describe("glyph style table", () => {
  it("is total over force kinds", () => {
    for (const kind of KINDS) {
      expect(GLYPH_STYLES[kind].shape).toBeTruthy();
      expect(GLYPH_STYLES[kind].color).toMatch(/^#[0-9a-f]{6}$/);
    }
  });

  it("uses four visually distinct shapes", () => {
    const shapes = KINDS.map((k) => GLYPH_STYLES[k].shape);
    expect(new Set(shapes).size).toBe(4);
  });

  it("maps the documented shape per kind", () => {
    expect(GLYPH_STYLES.Proposition.shape).toBe("tetrahedron");
    expect(GLYPH_STYLES.Clarification.shape).toBe("sphere");
    expect(GLYPH_STYLES.Evaluation.shape).toBe("cube");
    expect(GLYPH_STYLES.Validation.shape).toBe("octahedron");
  });

  it("colors negative evaluations red, other evaluations orange", () => {
    expect(glyphFor({ kind: "Evaluation", polarity: "Negative" }).color).toBe("#dc2626");
    expect(glyphFor({ kind: "Evaluation", polarity: "Positive" }).color).toBe("#f97316");
    expect(glyphFor({ kind: "Evaluation" }).color).toBe("#f97316");
  });

  it("keeps the shape stable across polarity", () => {
    expect(glyphFor({ kind: "Evaluation", polarity: "Negative" }).shape).toBe("cube");
  });
});
