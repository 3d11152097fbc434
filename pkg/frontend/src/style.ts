/** Glyph encoding: the marker's shape and color carry the annotation's
 * intention, so a participant can read the review at a glance. */

import type { Force, ForceKind } from "./types.js";

export type GlyphShape = "tetrahedron" | "sphere" | "cube" | "octahedron";

export interface GlyphStyle {
  shape: GlyphShape;
  color: string;
}

export const GLYPH_STYLES: Record<ForceKind, GlyphStyle> = {
  Proposition: { shape: "tetrahedron", color: "#2563eb" }, // blue
  Clarification: { shape: "sphere", color: "#eab308" }, // yellow
  Evaluation: { shape: "cube", color: "#f97316" }, // orange; red when negative
  Validation: { shape: "octahedron", color: "#16a34a" }, // green
};

const NEGATIVE_EVALUATION_COLOR = "#dc2626";

export function glyphFor(force: Force): GlyphStyle {
  const base = GLYPH_STYLES[force.kind];
  if (force.kind === "Evaluation" && force.polarity === "Negative") {
    return { shape: base.shape, color: NEGATIVE_EVALUATION_COLOR };
  }
  return base;
}
