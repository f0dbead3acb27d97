import type { GraphDelta, GraphDoc, GraphEdge, GraphNode } from "./types.js";

/** Client-side graph mirror. Holds no truth of its own: it only reflects
 * full snapshots and deltas acknowledged by the server. */
export class GraphStore {
  readonly nodes = new Map<string, GraphNode>();
  readonly edges = new Map<string, GraphEdge>();
  revision = 0;

  replaceAll(doc: GraphDoc): void {
    this.nodes.clear();
    this.edges.clear();
    for (const n of doc.nodes) this.nodes.set(n.id, n);
    for (const e of doc.edges) this.edges.set(e.id, e);
    this.revision = doc.revision;
  }

  applyDelta(delta: GraphDelta): void {
    if (delta.full) {
      this.nodes.clear();
      this.edges.clear();
    }
    for (const n of delta.nodes) this.nodes.set(n.id, n);
    for (const e of delta.edges) this.edges.set(e.id, e);
    for (const id of delta.removed_nodes) this.nodes.delete(id);
    for (const id of delta.removed_edges) this.edges.delete(id);
    // edges whose endpoints vanished can never render
    for (const [id, e] of this.edges) {
      if (!this.nodes.has(e.parent) || !this.nodes.has(e.child)) this.edges.delete(id);
    }
    this.revision = delta.revision;
  }
}
