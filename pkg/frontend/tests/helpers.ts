import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { SurfaceMesh } from "../src/mesh.js";
import type { Annotation, Force, MeshPayload } from "../src/types.js";

export function fixture(name: string): string {
  return fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));
}

export function loadCubeMesh(): SurfaceMesh {
  const payload = JSON.parse(readFileSync(fixture("cube_mesh.json"), "utf-8")) as MeshPayload;
  return new SurfaceMesh(payload);
}

let counter = 0;

export function makeAnnotation(overrides: Partial<Annotation> & { force?: Force } = {}): Annotation {
  counter += 1;
  return {
    id: `ann-${counter}`,
    document: "fixture-cube",
    document_revision: 1,
    author: "meera",
    created_at: "2024-03-01T09:00:00Z",
    force: { kind: "Proposition" },
    utterance: { text: "move the tubes of 40mm", content_kind: "Action" },
    anchor: { face: 2, bary: [0.5, 0.25, 0.25], normal_offset: 0 },
    sphere: "Public",
    status: "Open",
    orphaned: false,
    version: 1,
    thread: [],
    references: [],
    ...overrides,
  };
}

export const FIG2A_TEXT = "interference at the exhaust tubes level";
export const FIG2B_TEXT =
  "Idem for the tire suspension, move the tubes of 40mm (or more), " +
  "in order to avoid the interference and to keep a minimum tolerance of 30mm";
