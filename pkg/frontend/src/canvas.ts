import type { CanvasController } from "./controller.js";
import {
  NODE_HEIGHT,
  NODE_WIDTH,
  fromScreen,
  toScreen,
  type Scene,
  type SceneNode,
} from "./scene.js";

const ZOOM_STEP = 1.1;
const ZOOM_MIN = 0.2;
const ZOOM_MAX = 3;

export interface CanvasCallbacks {
  onSelect?: (nodeId: string | null) => void;
  onError?: (message: string) => void;
}

/** Canvas renderer with pan, wheel zoom, and drag-to-reposition. Dragging a
 * node patches its position through the controller once the pointer lifts. */
export class GraphCanvas {
  private readonly ctx: CanvasRenderingContext2D;
  private dragging: { nodeId: string; dx: number; dy: number } | null = null;
  private panning: { startX: number; startY: number } | null = null;
  private pendingDrag: [number, number] | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly controller: CanvasController,
    private readonly callbacks: CanvasCallbacks = {},
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
    canvas.addEventListener("wheel", (e) => this.onWheel(e));
    canvas.addEventListener("pointerdown", (e) => this.onPointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.onPointerMove(e));
    canvas.addEventListener("pointerup", (e) => void this.onPointerUp(e));
  }

  render(): void {
    const scene = this.controller.scene();
    const view = this.controller.view;
    this.ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    const centers = new Map<string, [number, number]>();
    for (const node of scene.nodes) {
      centers.set(node.id, [node.x + NODE_WIDTH / 2, node.y + NODE_HEIGHT / 2]);
    }
    for (const edge of scene.edges) {
      const a = centers.get(edge.from);
      const b = centers.get(edge.to);
      if (!a || !b) continue;
      const [ax, ay] = toScreen(view, a[0], a[1]);
      const [bx, by] = toScreen(view, b[0], b[1]);
      this.ctx.strokeStyle = "#8a8a8a";
      this.ctx.beginPath();
      this.ctx.moveTo(ax, ay);
      this.ctx.lineTo(bx, by);
      this.ctx.stroke();
      if (edge.label) {
        this.ctx.fillStyle = "#555";
        this.ctx.fillText(edge.label, (ax + bx) / 2, (ay + by) / 2 - 4);
      }
    }
    for (const node of scene.nodes) this.drawNode(node, scene);
  }

  private drawNode(node: SceneNode, scene: Scene): void {
    const view = this.controller.view;
    const [x, y] = toScreen(view, node.x, node.y);
    const w = NODE_WIDTH * view.zoom;
    const h = NODE_HEIGHT * view.zoom;
    this.ctx.fillStyle = node.starred ? "#fff3c4" : "#f5f7fa";
    this.ctx.strokeStyle = node.selected ? "#2a6fdb" : "#4a4a4a";
    this.ctx.lineWidth = node.selected ? 2 : 1;
    this.ctx.fillRect(x, y, w, h);
    this.ctx.strokeRect(x, y, w, h);
    this.ctx.fillStyle = "#1a1a1a";
    this.ctx.fillText(node.title, x + 6, y + 16, w - 12);
    if (node.detail) {
      this.ctx.fillStyle = "#555";
      this.ctx.fillText(node.detail, x + 6, y + 34, w - 12);
    }
    void scene;
  }

  private hitTest(sx: number, sy: number): SceneNode | null {
    const view = this.controller.view;
    const [wx, wy] = fromScreen(view, sx, sy);
    const nodes = this.controller.scene().nodes;
    for (let i = nodes.length - 1; i >= 0; i--) {
      const n = nodes[i];
      if (wx >= n.x && wx <= n.x + NODE_WIDTH && wy >= n.y && wy <= n.y + NODE_HEIGHT) {
        return n;
      }
    }
    return null;
  }

  private onWheel(e: WheelEvent): void {
    e.preventDefault();
    const view = this.controller.view;
    const factor = e.deltaY < 0 ? ZOOM_STEP : 1 / ZOOM_STEP;
    view.zoom = Math.min(ZOOM_MAX, Math.max(ZOOM_MIN, view.zoom * factor));
    this.render();
  }

  private onPointerDown(e: PointerEvent): void {
    const hit = this.hitTest(e.offsetX, e.offsetY);
    const view = this.controller.view;
    if (hit) {
      const [wx, wy] = fromScreen(view, e.offsetX, e.offsetY);
      this.dragging = { nodeId: hit.id, dx: wx - hit.x, dy: wy - hit.y };
      view.selectedNode = hit.id;
    } else {
      this.panning = { startX: e.offsetX - view.panX, startY: e.offsetY - view.panY };
      view.selectedNode = null;
    }
    this.callbacks.onSelect?.(view.selectedNode);
    this.render();
  }

  private onPointerMove(e: PointerEvent): void {
    const view = this.controller.view;
    if (this.dragging) {
      const [wx, wy] = fromScreen(view, e.offsetX, e.offsetY);
      // track locally while the pointer is down; commit happens on release
      this.pendingDrag = [wx - this.dragging.dx, wy - this.dragging.dy];
    } else if (this.panning) {
      view.panX = e.offsetX - this.panning.startX;
      view.panY = e.offsetY - this.panning.startY;
      this.render();
    }
  }

  private async onPointerUp(e: PointerEvent): Promise<void> {
    void e;
    if (this.dragging && this.pendingDrag) {
      const [x, y] = this.pendingDrag;
      try {
        await this.controller.dragNodeTo(this.dragging.nodeId, x, y);
      } catch (err) {
        this.callbacks.onError?.(err instanceof Error ? err.message : String(err));
      }
    }
    this.dragging = null;
    this.panning = null;
    this.pendingDrag = null;
    this.render();
  }
}
