/** Turns the annotation set plus the active filters into drawable glyphs. */

import type * as THREE from "three";
import { SurfaceMesh } from "./mesh.js";
import { glyphFor, GlyphStyle } from "./style.js";
import { matchesFilters, FilterState } from "./filters.js";
import type { Annotation } from "./types.js";

export interface Glyph {
  annotationId: string;
  position: THREE.Vector3;
  style: GlyphStyle;
  orphaned: boolean;
  selected: boolean;
}

export function computeOverlay(
  annotations: Iterable<Annotation>,
  filters: FilterState,
  mesh: SurfaceMesh,
  selectedId?: string,
): Glyph[] {
  const glyphs: Glyph[] = [];
  for (const annotation of annotations) {
    if (!matchesFilters(annotation, filters)) continue;
    if (annotation.anchor.face >= mesh.faceCount()) continue; // stale anchor for this revision
    glyphs.push({
      annotationId: annotation.id,
      position: mesh.anchorToPoint(annotation.anchor),
      style: glyphFor(annotation.force),
      orphaned: annotation.orphaned,
      selected: annotation.id === selectedId,
    });
  }
  return glyphs;
}
