/** Screen-point picking and the annotation draft form it opens. */

import * as THREE from "three";
import { SurfaceMesh } from "./mesh.js";
import { validateAct } from "./validate.js";
import type {
  AnchorData,
  ContentKind,
  Force,
  ForceKind,
  RefKind,
  Sphere,
  Viewpoint,
} from "./types.js";

export interface CameraState extends Viewpoint {
  fov: number; // degrees
  aspect: number;
}

export function defaultCamera(mesh: SurfaceMesh, aspect = 1): CameraState {
  const { center, radius } = mesh.boundingSphere();
  return {
    position: [center.x, center.y, center.z + 3 * Math.max(radius, 1e-9)],
    target: [center.x, center.y, center.z],
    up: [0, 1, 0],
    fov: 50,
    aspect,
  };
}

export function buildCamera(state: CameraState): THREE.PerspectiveCamera {
  const [ux, uy, uz] = state.up;
  if (ux * ux + uy * uy + uz * uz === 0) {
    throw new Error("camera up vector must be non-zero");
  }
  const camera = new THREE.PerspectiveCamera(state.fov, state.aspect, 0.01, 1000);
  camera.position.set(...state.position);
  camera.up.set(...state.up);
  camera.lookAt(new THREE.Vector3(...state.target));
  camera.updateMatrixWorld(true);
  camera.updateProjectionMatrix();
  return camera;
}

/** Un-project a canvas pixel to a world-space ray. */
export function rayFromScreen(
  state: CameraState,
  x: number,
  y: number,
  width: number,
  height: number,
): THREE.Raycaster {
  const ndc = new THREE.Vector2((x / width) * 2 - 1, -((y / height) * 2 - 1));
  const raycaster = new THREE.Raycaster();
  raycaster.setFromCamera(ndc, buildCamera(state));
  return raycaster;
}

/** Project a world point back to canvas pixels (for overlay placement). */
export function projectToScreen(
  point: THREE.Vector3,
  state: CameraState,
  width: number,
  height: number,
): [number, number] {
  const projected = point.clone().project(buildCamera(state));
  return [((projected.x + 1) / 2) * width, ((1 - projected.y) / 2) * height];
}

/** Draft the pick opens; force, content kind, utterance and sphere must be
 * filled in before submit() will produce a request body. */
export interface AnnotationDraft {
  anchor: AnchorData;
  force_kind?: ForceKind;
  clarification_kind?: "Solution" | "Problem";
  polarity?: "Positive" | "Negative" | "Neutral";
  content_kind?: ContentKind;
  text: string;
  sphere?: Sphere;
  references: { target: string; target_kind: ForceKind; kind: RefKind }[];
}

export function pickToAnnotate(
  mesh: SurfaceMesh,
  camera: CameraState,
  x: number,
  y: number,
  width: number,
  height: number,
): AnnotationDraft | null {
  const hit = mesh.pick(rayFromScreen(camera, x, y, width, height));
  if (!hit) return null; // background click: no form, just a transient notice
  return { anchor: hit.anchor, text: "", references: [] };
}

export interface DraftSubmission {
  force: Force;
  utterance: { text: string; content_kind: ContentKind };
  anchor: AnchorData;
  sphere: Sphere;
  references: { target: string; kind: RefKind }[];
}

/** Mirror of the server-side grammar plus required-field checks; a draft
 * only leaves the client when this returns no errors. */
export function draftErrors(draft: AnnotationDraft): string[] {
  const missing: string[] = [];
  if (!draft.force_kind) missing.push("FORCE_KIND_REQUIRED");
  if (!draft.content_kind) missing.push("CONTENT_KIND_REQUIRED");
  if (!draft.sphere) missing.push("SPHERE_REQUIRED");
  if (missing.length > 0 && !draft.force_kind) return missing.concat(textOnlyErrors(draft));
  const force: Force = {
    kind: draft.force_kind!,
    ...(draft.clarification_kind != null ? { clarification_kind: draft.clarification_kind } : {}),
    ...(draft.polarity != null ? { polarity: draft.polarity } : {}),
  };
  const grammar = validateAct(
    force,
    { text: draft.text, content_kind: draft.content_kind ?? "Other" },
    draft.references.map((r) => [r.target_kind, r.kind]),
  );
  return missing.concat(grammar);
}

function textOnlyErrors(draft: AnnotationDraft): string[] {
  return draft.text.trim() === "" ? ["EMPTY_UTTERANCE"] : [];
}

export function submitDraft(draft: AnnotationDraft): DraftSubmission {
  const errors = draftErrors(draft);
  if (errors.length > 0) {
    throw new Error(`draft is not submittable: ${errors.join(", ")}`);
  }
  return {
    force: {
      kind: draft.force_kind!,
      ...(draft.clarification_kind != null ? { clarification_kind: draft.clarification_kind } : {}),
      ...(draft.polarity != null ? { polarity: draft.polarity } : {}),
    },
    utterance: { text: draft.text, content_kind: draft.content_kind! },
    anchor: draft.anchor,
    sphere: draft.sphere!,
    references: draft.references.map((r) => ({ target: r.target, kind: r.kind })),
  };
}
