import type { GraphStore } from "./store.js";

/** Below this zoom level only node titles are drawn; details and edge labels
 * drop out of the scene entirely. */
export const DETAIL_ZOOM_THRESHOLD = 0.6;

export const NODE_WIDTH = 220;
export const NODE_HEIGHT = 64;

export interface ViewState {
  zoom: number;
  panX: number;
  panY: number;
  selectedNode: string | null;
  revision: number;
}

export function initialView(): ViewState {
  return { zoom: 1, panX: 0, panY: 0, selectedNode: null, revision: 0 };
}

export interface SceneNode {
  id: string;
  x: number;
  y: number;
  title: string;
  detail?: string;
  starred: boolean;
  selected: boolean;
}

export interface SceneEdge {
  from: string;
  to: string;
  label?: string;
}

export interface Scene {
  zoom: number;
  nodes: SceneNode[];
  edges: SceneEdge[];
}

/** Pure function from server state + view to a drawable scene. Positions fall
 * back to the supplied layout map for nodes the user has never dragged. */
export function buildScene(
  store: GraphStore,
  view: ViewState,
  layout: Record<string, [number, number]> = {},
): Scene {
  const showDetail = view.zoom >= DETAIL_ZOOM_THRESHOLD;
  const nodes: SceneNode[] = [];
  for (const node of [...store.nodes.values()].sort((a, b) => (a.id < b.id ? -1 : 1))) {
    const pos = node.position ?? layout[node.id] ?? [0, 0];
    const scene: SceneNode = {
      id: node.id,
      x: pos[0],
      y: pos[1],
      title: node.title,
      starred: node.starred,
      selected: node.id === view.selectedNode,
    };
    if (showDetail && node.detail) scene.detail = node.detail;
    nodes.push(scene);
  }
  const edges: SceneEdge[] = [];
  for (const edge of [...store.edges.values()].sort((a, b) => (a.id < b.id ? -1 : 1))) {
    const scene: SceneEdge = { from: edge.parent, to: edge.child };
    if (showDetail && edge.label) scene.label = edge.label;
    edges.push(scene);
  }
  return { zoom: view.zoom, nodes, edges };
}

/** Screen-space coordinates for a scene position under the current view. */
export function toScreen(view: ViewState, x: number, y: number): [number, number] {
  return [x * view.zoom + view.panX, y * view.zoom + view.panY];
}

export function fromScreen(view: ViewState, sx: number, sy: number): [number, number] {
  return [(sx - view.panX) / view.zoom, (sy - view.panY) / view.zoom];
}
