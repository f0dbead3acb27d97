export { ApiClient, ApiError } from "./api.js";
export { GraphStore } from "./store.js";
export {
  DETAIL_ZOOM_THRESHOLD,
  NODE_HEIGHT,
  NODE_WIDTH,
  buildScene,
  fromScreen,
  initialView,
  toScreen,
} from "./scene.js";
export type { Scene, SceneEdge, SceneNode, ViewState } from "./scene.js";
export { CanvasController } from "./controller.js";
export { GraphCanvas } from "./canvas.js";
export { chatPanel, filePanel, nodeToolbar, widgetBar } from "./panels.js";
export type * from "./types.js";
