/** Local copy of a document's mesh, built from the server's JSON payload.
 *
 * Picking runs against this copy so a click resolves to an anchor without a
 * server round trip; the anchor (face + barycentric coordinates) is what
 * gets submitted.
 */

import * as THREE from "three";
import type { AnchorData, MeshPayload } from "./types.js";

export interface PickHit {
  anchor: AnchorData;
  point: THREE.Vector3;
  distance: number;
}

export class SurfaceMesh {
  readonly payload: MeshPayload;
  readonly geometry: THREE.BufferGeometry;
  readonly object: THREE.Mesh;

  constructor(payload: MeshPayload) {
    this.payload = payload;
    const positions = new Float32Array(payload.vertices.length * 3);
    payload.vertices.forEach((v, i) => positions.set(v, i * 3));
    const index = new Uint32Array(payload.faces.length * 3);
    payload.faces.forEach((f, i) => index.set(f, i * 3));
    this.geometry = new THREE.BufferGeometry();
    this.geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
    this.geometry.setIndex(new THREE.BufferAttribute(index, 1));
    this.geometry.computeVertexNormals();
    this.geometry.computeBoundingSphere();
    this.object = new THREE.Mesh(this.geometry, new THREE.MeshStandardMaterial());
    this.object.updateMatrixWorld(true);
  }

  faceCount(): number {
    return this.payload.faces.length;
  }

  triangle(face: number): [THREE.Vector3, THREE.Vector3, THREE.Vector3] {
    const [a, b, c] = this.payload.faces[face];
    const v = this.payload.vertices;
    return [
      new THREE.Vector3(...v[a]),
      new THREE.Vector3(...v[b]),
      new THREE.Vector3(...v[c]),
    ];
  }

  /** Reconstruct the 3D position of an anchor, standoff included. */
  anchorToPoint(anchor: AnchorData): THREE.Vector3 {
    const [a, b, c] = this.triangle(anchor.face);
    const [b0, b1, b2] = anchor.bary;
    const point = new THREE.Vector3()
      .addScaledVector(a, b0)
      .addScaledVector(b, b1)
      .addScaledVector(c, b2);
    if (anchor.normal_offset !== 0) {
      point.addScaledVector(this.faceNormal(anchor.face), anchor.normal_offset);
    }
    return point;
  }

  faceNormal(face: number): THREE.Vector3 {
    const [a, b, c] = this.triangle(face);
    return new THREE.Vector3().crossVectors(b.clone().sub(a), c.clone().sub(a)).normalize();
  }

  boundingSphere(): { center: THREE.Vector3; radius: number } {
    const sphere = this.geometry.boundingSphere!;
    return { center: sphere.center.clone(), radius: sphere.radius };
  }

  /** Closest ray hit as an anchor, or null when the ray misses. */
  pick(raycaster: THREE.Raycaster): PickHit | null {
    const hits = raycaster.intersectObject(this.object, false);
    if (hits.length === 0) return null;
    const hit = hits[0];
    const face = hit.faceIndex!;
    const [a, b, c] = this.triangle(face);
    const bary = new THREE.Vector3();
    THREE.Triangle.getBarycoord(hit.point, a, b, c, bary);
    const clamped = clampBary([bary.x, bary.y, bary.z]);
    return {
      anchor: { face, bary: clamped, normal_offset: 0 },
      point: hit.point.clone(),
      distance: hit.distance,
    };
  }
}

function clampBary(raw: [number, number, number]): [number, number, number] {
  const positive = raw.map((x) => Math.max(x, 0));
  const sum = positive[0] + positive[1] + positive[2];
  return [positive[0] / sum, positive[1] / sum, positive[2] / sum];
}
