import type { ApiClient } from "./api.js";
import { GraphStore } from "./store.js";
import { buildScene, initialView, type Scene, type ViewState } from "./scene.js";
import type { ActionReply, ChatReply, Suggestion } from "./types.js";

/** Binds the API client, the server-mirroring store, and the view. All
 * mutations round-trip through the service; nothing renders optimistically. */
export class CanvasController {
  readonly store = new GraphStore();
  readonly view: ViewState = initialView();
  private layoutPositions: Record<string, [number, number]> = {};

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  async init(): Promise<void> {
    const { graph } = await this.api.getGraph(this.sessionId);
    this.store.replaceAll(graph);
    await this.refreshLayout(false);
    this.view.revision = this.store.revision;
  }

  async refreshLayout(full: boolean): Promise<void> {
    const { positions } = await this.api.layout(this.sessionId, full);
    this.layoutPositions = positions;
    if (full) await this.sync();
  }

  /** Delta poll; keeps the canvas current without refetching everything. */
  async sync(): Promise<void> {
    const delta = await this.api.getDelta(this.sessionId, this.store.revision);
    this.store.applyDelta(delta);
    this.view.revision = this.store.revision;
  }

  scene(): Scene {
    return buildScene(this.store, this.view, this.layoutPositions);
  }

  /** Drag commits only on server acknowledgment, via the raw-ops endpoint. */
  async dragNodeTo(nodeId: string, x: number, y: number): Promise<void> {
    const reply = await this.api.applyOps(this.sessionId, this.store.revision, [
      { kind: "UpdateNode", args: [nodeId, "position", `${x},${y}`] },
    ]);
    this.store.applyDelta(reply.graph_delta);
    this.view.revision = this.store.revision;
  }

  // ------------------------------------------------------- node toolbar

  async star(nodeId: string): Promise<boolean> {
    const reply = await this.absorb(this.api.nodeAction(this.sessionId, nodeId, "star"));
    return reply.starred === true;
  }

  async deleteNode(nodeId: string): Promise<string[]> {
    if (this.view.selectedNode === nodeId) this.view.selectedNode = null;
    const reply = await this.absorb(this.api.nodeAction(this.sessionId, nodeId, "delete"));
    return reply.removed ?? [];
  }

  async suggest(nodeId: string): Promise<Suggestion[]> {
    const reply = await this.absorb(this.api.nodeAction(this.sessionId, nodeId, "suggest"));
    return reply.suggestions ?? [];
  }

  async expand(nodeId: string, input?: string): Promise<string> {
    const reply = await this.absorb(
      this.api.nodeAction(this.sessionId, nodeId, "expand", input),
    );
    return reply.text ?? "";
  }

  // --------------------------------------------------------- widget bar

  async createNode(title: string, detail: string, parent = "", label = ""): Promise<void> {
    const reply = await this.api.applyOps(this.sessionId, this.store.revision, [
      { kind: "AddNode", args: [title, detail, parent, label] },
    ]);
    this.store.applyDelta(reply.graph_delta);
    this.view.revision = this.store.revision;
  }

  /** Server-side re-layout; discards manual positions, so callers must
   * confirm with the user first. */
  async rearrange(): Promise<void> {
    await this.refreshLayout(true);
  }

  // --------------------------------------------------------- chat panel

  async chat(input: string, focusNode?: string): Promise<ChatReply> {
    const reply = await this.api.chat(this.sessionId, input, focusNode);
    this.store.applyDelta(reply.graph_delta);
    this.view.revision = this.store.revision;
    return reply;
  }

  // --------------------------------------------------------- file panel

  async uploadDocument(title: string, body: string, targetWords = 300): Promise<number> {
    const { chunks } = await this.api.uploadDocument(this.sessionId, title, body, targetWords);
    return chunks;
  }

  private async absorb(pending: Promise<ActionReply>): Promise<ActionReply> {
    const reply = await pending;
    this.store.applyDelta(reply.graph_delta);
    this.view.revision = this.store.revision;
    return reply;
  }
}
