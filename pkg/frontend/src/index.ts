export * from "./types.js";
export * from "./style.js";
export * from "./validate.js";
export * from "./filters.js";
export { SurfaceMesh } from "./mesh.js";
export type { PickHit } from "./mesh.js";
export * from "./pick.js";
export * from "./overlay.js";
export * from "./events.js";
export * from "./api.js";
export { Viewer } from "./viewer.js";
export type { ViewerCallbacks } from "./viewer.js";
