/** Browser viewer: renders the model, the annotation glyph overlay, and
 * wires pointer input to picking. Pure-logic pieces (picking math, filter
 * matching, event reduction) live in their own modules; this file is the
 * DOM/WebGL shell around them. */

import * as THREE from "three";
import { SurfaceMesh } from "./mesh.js";
import { computeOverlay, Glyph } from "./overlay.js";
import { buildCamera, CameraState, defaultCamera, pickToAnnotate, AnnotationDraft } from "./pick.js";
import { FilterState } from "./filters.js";
import { SessionFeed } from "./events.js";
import type { Annotation } from "./types.js";

export interface ViewerCallbacks {
  /** background-miss notice, e.g. a transient "no surface hit" toast */
  onMiss?: () => void;
  /** a successful pick opened a draft form */
  onDraft?: (draft: AnnotationDraft) => void;
  /** a glyph was clicked: open its thread panel */
  onSelect?: (annotation: Annotation) => void;
}

const GLYPH_GEOMETRY: Record<string, () => THREE.BufferGeometry> = {
  tetrahedron: () => new THREE.TetrahedronGeometry(1),
  sphere: () => new THREE.SphereGeometry(1, 16, 12),
  cube: () => new THREE.BoxGeometry(1.4, 1.4, 1.4),
  octahedron: () => new THREE.OctahedronGeometry(1),
};

export class Viewer {
  camera: CameraState;
  filters: FilterState = {};
  selected: string | undefined;
  readonly feed = new SessionFeed();

  private readonly scene = new THREE.Scene();
  private readonly renderer: THREE.WebGLRenderer;
  private readonly glyphGroup = new THREE.Group();
  private readonly glyphScale: number;
  private orbit = { dragging: false, lastX: 0, lastY: 0, theta: 0, phi: Math.PI / 2, radius: 3 };

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly mesh: SurfaceMesh,
    private readonly callbacks: ViewerCallbacks = {},
  ) {
    this.camera = defaultCamera(mesh, canvas.clientWidth / Math.max(canvas.clientHeight, 1));
    const { radius, center } = mesh.boundingSphere();
    this.glyphScale = radius * 0.04;
    this.orbit.radius = 3 * radius;
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setSize(canvas.clientWidth, canvas.clientHeight, false);
    this.scene.background = new THREE.Color("#1c1f26");
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.6));
    const key = new THREE.DirectionalLight(0xffffff, 1.2);
    key.position.set(2, 3, 4);
    this.scene.add(key);
    this.mesh.object.material = new THREE.MeshStandardMaterial({
      color: "#8d99ae",
      flatShading: true,
    });
    this.scene.add(this.mesh.object);
    this.scene.add(this.glyphGroup);
    this.orbitTargetFrom(center);
    canvas.addEventListener("pointerdown", (e) => this.onPointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.onPointerMove(e));
    canvas.addEventListener("pointerup", (e) => this.onPointerUp(e));
    canvas.addEventListener("wheel", (e) => this.onWheel(e), { passive: true });
  }

  private orbitTargetFrom(center: THREE.Vector3): void {
    this.camera.target = [center.x, center.y, center.z];
    this.applyOrbit();
  }

  private applyOrbit(): void {
    const [tx, ty, tz] = this.camera.target;
    const { radius, theta, phi } = this.orbit;
    this.camera.position = [
      tx + radius * Math.sin(phi) * Math.sin(theta),
      ty + radius * Math.cos(phi),
      tz + radius * Math.sin(phi) * Math.cos(theta),
    ];
  }

  /** Re-derive glyphs from the feed + filters and redraw. */
  render(): void {
    if (this.feed.followPresenter && this.feed.camera) {
      this.camera.position = [...this.feed.camera.position];
      this.camera.target = [...this.feed.camera.target];
      this.camera.up = [...this.feed.camera.up];
    }
    this.glyphGroup.clear();
    for (const glyph of computeOverlay(this.feed.annotations(), this.filters, this.mesh, this.selected)) {
      this.glyphGroup.add(this.buildGlyphObject(glyph));
    }
    this.renderer.render(this.scene, buildCamera(this.camera));
  }

  private buildGlyphObject(glyph: Glyph): THREE.Object3D {
    const geometry = GLYPH_GEOMETRY[glyph.style.shape]();
    const material = new THREE.MeshStandardMaterial({
      color: glyph.style.color,
      emissive: glyph.selected ? "#ffffff" : "#000000",
      emissiveIntensity: glyph.selected ? 0.35 : 0,
    });
    const object = new THREE.Mesh(geometry, material);
    object.position.copy(glyph.position);
    object.scale.setScalar(this.glyphScale);
    object.userData.annotationId = glyph.annotationId;
    if (glyph.orphaned) {
      // orphaned badge: a warning ring around the glyph
      const ring = new THREE.Mesh(
        new THREE.TorusGeometry(1.6, 0.12, 8, 24),
        new THREE.MeshBasicMaterial({ color: "#f43f5e" }),
      );
      object.add(ring);
    }
    return object;
  }

  private onPointerDown(event: PointerEvent): void {
    this.orbit.dragging = true;
    this.orbit.lastX = event.clientX;
    this.orbit.lastY = event.clientY;
  }

  private onPointerMove(event: PointerEvent): void {
    if (!this.orbit.dragging || this.feed.followPresenter) return;
    const dx = event.clientX - this.orbit.lastX;
    const dy = event.clientY - this.orbit.lastY;
    if (Math.abs(dx) + Math.abs(dy) < 1) return;
    this.orbit.lastX = event.clientX;
    this.orbit.lastY = event.clientY;
    this.orbit.theta -= dx * 0.008;
    this.orbit.phi = Math.min(Math.PI - 0.05, Math.max(0.05, this.orbit.phi - dy * 0.008));
    this.applyOrbit();
    this.render();
  }

  private onPointerUp(event: PointerEvent): void {
    const wasDrag =
      Math.abs(event.clientX - this.orbit.lastX) + Math.abs(event.clientY - this.orbit.lastY) > 3;
    this.orbit.dragging = false;
    if (wasDrag) return;
    const rect = this.canvas.getBoundingClientRect();
    const x = event.clientX - rect.left;
    const y = event.clientY - rect.top;
    const selected = this.pickGlyph(x, y, rect.width, rect.height);
    if (selected) {
      this.selected = selected;
      const annotation = this.feed.annotation(selected);
      if (annotation) this.callbacks.onSelect?.(annotation);
      this.render();
      return;
    }
    const draft = pickToAnnotate(this.mesh, this.camera, x, y, rect.width, rect.height);
    if (draft) this.callbacks.onDraft?.(draft);
    else this.callbacks.onMiss?.();
  }

  private pickGlyph(x: number, y: number, width: number, height: number): string | undefined {
    const ndc = new THREE.Vector2((x / width) * 2 - 1, -((y / height) * 2 - 1));
    const raycaster = new THREE.Raycaster();
    raycaster.setFromCamera(ndc, buildCamera(this.camera));
    const hits = raycaster.intersectObjects(this.glyphGroup.children, true);
    for (const hit of hits) {
      let node: THREE.Object3D | null = hit.object;
      while (node) {
        if (node.userData.annotationId) return node.userData.annotationId as string;
        node = node.parent;
      }
    }
    return undefined;
  }

  private onWheel(event: WheelEvent): void {
    if (this.feed.followPresenter) return;
    this.orbit.radius *= event.deltaY > 0 ? 1.1 : 0.9;
    this.applyOrbit();
    this.render();
  }
}
