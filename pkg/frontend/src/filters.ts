/** Client-side annotation filters, kept in lockstep with the server's
 * query semantics so the visible glyph set equals the equivalent server
 * query (asserted by the tests). */

import type { Annotation, ContentKind, ForceKind, Polarity, Sphere, Status } from "./types.js";

export interface FilterState {
  force_kind?: ForceKind;
  clarification_kind?: "Solution" | "Problem";
  polarity?: Polarity;
  content_kind?: ContentKind;
  author?: string;
  status?: Status;
  sphere?: Sphere;
  text_substring?: string;
}

export function matchesFilters(annotation: Annotation, filters: FilterState): boolean {
  if (filters.force_kind != null && annotation.force.kind !== filters.force_kind) return false;
  if (
    filters.clarification_kind != null &&
    annotation.force.clarification_kind !== filters.clarification_kind
  )
    return false;
  if (filters.polarity != null && annotation.force.polarity !== filters.polarity) return false;
  if (filters.content_kind != null && annotation.utterance.content_kind !== filters.content_kind)
    return false;
  if (filters.author != null && annotation.author !== filters.author) return false;
  if (filters.status != null && annotation.status !== filters.status) return false;
  if (filters.sphere != null && annotation.sphere !== filters.sphere) return false;
  if (filters.text_substring != null) {
    const needle = filters.text_substring.toLowerCase();
    const haystacks = [annotation.utterance.text, ...annotation.thread.map((e) => e.text)];
    if (!haystacks.some((h) => h.toLowerCase().includes(needle))) return false;
  }
  return true;
}

export function toQueryParams(filters: FilterState): URLSearchParams {
  const params = new URLSearchParams();
  for (const [key, value] of Object.entries(filters)) {
    if (value != null) params.set(key, String(value));
  }
  return params;
}
