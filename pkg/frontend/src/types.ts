/** Wire types mirroring the service's JSON payloads. */

export interface GraphNode {
  id: string;
  title: string;
  detail: string;
  origin: string;
  starred: boolean;
  position: [number, number] | null;
  group: string | null;
}

export interface GraphEdge {
  id: string;
  parent: string;
  child: string;
  label: string;
}

export interface GraphDoc {
  format: string;
  version: number;
  revision: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface GraphDelta {
  revision: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
  removed_nodes: string[];
  removed_edges: string[];
  full: boolean;
}

export interface Suggestion {
  topic: string;
  description: string;
  relationship: string;
}

export interface ChatReply {
  text: string;
  applied_ops: Record<string, unknown>[];
  revision: number;
  error: string | null;
  graph_delta: GraphDelta;
}

export interface RawOp {
  kind: "AddNode" | "AddEdge" | "DeleteNode" | "DeleteEdge" | "UpdateNode";
  args: string[];
}

export interface OpsReply {
  applied: Record<string, unknown>[];
  revision: number;
  graph_delta: GraphDelta;
}

export interface ActionReply {
  revision: number;
  graph_delta: GraphDelta;
  starred?: boolean;
  removed?: string[];
  suggestions?: Suggestion[];
  text?: string;
  applied_ops?: Record<string, unknown>[];
}
