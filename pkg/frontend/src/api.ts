import type {
  ActionReply,
  ChatReply,
  GraphDelta,
  GraphDoc,
  OpsReply,
  RawOp,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly stage?: string,
  ) {
    super(stage ? `${stage}: ${message}` : message);
  }
}

/** Thin client over the service HTTP API; every mutation goes through here. */
export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.baseUrl + path, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : {},
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const payload = (await res.json()) as Record<string, unknown>;
    if (!res.ok) {
      throw new ApiError(
        res.status,
        String(payload.error ?? res.statusText),
        payload.stage as string | undefined,
      );
    }
    return payload as T;
  }

  createSession(): Promise<{ session_id: string; revision: number }> {
    return this.request("POST", "/sessions");
  }

  uploadDocument(
    sessionId: string,
    title: string,
    body: string,
    targetWords = 300,
  ): Promise<{ doc_id: string; chunks: number }> {
    return this.request("POST", `/sessions/${sessionId}/documents`, {
      title,
      body,
      target_words: targetWords,
    });
  }

  getGraph(sessionId: string): Promise<{ revision: number; graph: GraphDoc }> {
    return this.request("GET", `/sessions/${sessionId}/graph?since=-1`);
  }

  getDelta(sessionId: string, since: number): Promise<GraphDelta> {
    return this.request("GET", `/sessions/${sessionId}/graph?since=${since}`);
  }

  chat(sessionId: string, input: string, focusNode?: string): Promise<ChatReply> {
    return this.request("POST", `/sessions/${sessionId}/chat`, {
      input,
      focus_node: focusNode ?? null,
    });
  }

  nodeAction(
    sessionId: string,
    nodeId: string,
    action: "star" | "delete" | "suggest" | "expand",
    input?: string,
  ): Promise<ActionReply> {
    return this.request("POST", `/sessions/${sessionId}/nodes/${nodeId}/action`, {
      action,
      input: input ?? null,
    });
  }

  applyOps(sessionId: string, baseRevision: number, ops: RawOp[]): Promise<OpsReply> {
    return this.request("POST", `/sessions/${sessionId}/ops`, {
      base_revision: baseRevision,
      ops,
    });
  }

  layout(
    sessionId: string,
    full = false,
  ): Promise<{ positions: Record<string, [number, number]>; revision: number }> {
    return this.request("GET", `/sessions/${sessionId}/layout?full=${full}`);
  }

  save(sessionId: string): Promise<{ path: string; revision: number }> {
    return this.request("POST", `/sessions/${sessionId}/save`);
  }

  load(sessionId: string): Promise<{ session_id: string; revision: number }> {
    return this.request("POST", `/sessions/${sessionId}/load`);
  }
}
