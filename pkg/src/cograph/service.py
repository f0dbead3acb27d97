"""HTTP service and session lifecycle.

Sessions are persisted atomically (write-temp-then-rename) as one JSON
document holding the canonical graph serialization, the ingest store, the
retrieval tree, chat history, and the execution op log. Each session has a
single writer: all mutating requests for a session serialize through one
lock, so ops complete in arrival order.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    CographError,
    EmptyDocument,
    EmptyTree,
    MalformedDocument,
    ProviderFailure,
    UnknownNode,
)
from .graph import KnowledgeGraph
from .ingest import ChunkConfig, DocumentStore
from .map_manager import MapManager, MapManagerConfig, GraphOp as PlanOp, apply_op
from .oracle import ChatHistory, Oracle, Suggestion, suggest
from .raptor import ChunkTree, build_tree
from .retriever import Retriever, RetrieverConfig


class Session:
    def __init__(self, session_id: str, provider,
                 manager_config: MapManagerConfig | None = None,
                 retriever_config: RetrieverConfig | None = None):
        self.id = session_id
        self.provider = provider
        self.graph = KnowledgeGraph()
        self.store = DocumentStore(provider)
        self.tree: ChunkTree | None = None
        self.history = ChatHistory()
        self.suggestion_cache: dict[str, list[Suggestion]] = {}
        self.lock = threading.Lock()
        self.map_manager = MapManager(provider, manager_config)
        self.retriever = Retriever(self.graph, self.store, None, provider, retriever_config)
        self.oracle = Oracle(self.graph, self.retriever, self.map_manager, provider, self.history)

    def rebuild_tree(self) -> None:
        chunks = list(self.store.chunks.values())
        self.tree = build_tree(chunks, self.provider) if chunks else None
        self.retriever.tree = self.tree

    # ----------------------------------------------------------- persistence

    def to_dict(self) -> dict:
        return {
            "format": "cograph-session",
            "version": 1,
            "id": self.id,
            "graph": self.graph.to_dict(),
            "store": self.store.to_dict(),
            "tree": self.tree.to_dict() if self.tree is not None else None,
            "history": list(self.history),
            "op_log": self.map_manager.op_log,
            "suggestions": {
                nid: [s.to_dict() for s in items]
                for nid, items in self.suggestion_cache.items()
            },
        }

    @classmethod
    def from_dict(cls, doc: dict, provider) -> "Session":
        if doc.get("format") != "cograph-session":
            raise MalformedDocument("not a session document")
        session = cls(doc["id"], provider)
        session.graph = KnowledgeGraph.from_dict(doc["graph"])
        session.store = DocumentStore.from_dict(doc["store"], provider)
        session.tree = ChunkTree.from_dict(doc["tree"]) if doc["tree"] is not None else None
        for role, text in doc.get("history", []):
            session.history.add(role, text)
        session.map_manager.op_log = list(doc.get("op_log", []))
        session.suggestion_cache = {
            nid: [Suggestion(**s) for s in items]
            for nid, items in doc.get("suggestions", {}).items()
        }
        # rebind shared references after replacing graph/store/tree
        session.retriever = Retriever(session.graph, session.store, session.tree,
                                      provider, session.retriever.config)
        session.oracle = Oracle(session.graph, session.retriever, session.map_manager,
                                provider, session.history)
        return session


class SessionManager:
    def __init__(self, provider, data_dir: str | None = None):
        self.provider = provider
        self.data_dir = data_dir
        self.sessions: dict[str, Session] = {}
        if data_dir:
            os.makedirs(data_dir, exist_ok=True)

    def create(self) -> Session:
        session = Session(uuid.uuid4().hex[:12], self.provider)
        self.sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        return self.sessions.get(session_id)

    def _path(self, session_id: str) -> str:
        return os.path.join(self.data_dir, f"{session_id}.json")

    def save(self, session: Session) -> str:
        if not self.data_dir:
            raise CographError("no data directory configured")
        path = self._path(session.id)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(session.to_dict(), fh)
        os.replace(tmp, path)
        return path

    def load(self, session_id: str) -> Session:
        if not self.data_dir:
            raise CographError("no data directory configured")
        with open(self._path(session_id), encoding="utf-8") as fh:
            doc = json.load(fh)
        session = Session.from_dict(doc, self.provider)
        self.sessions[session.id] = session
        return session


# --------------------------------------------------------------------- deltas

def graph_delta(graph: KnowledgeGraph, since: int) -> dict:
    """Delta from `since` to the current revision; upsert semantics.

    Applying the delta to a client copy at revision `since` (upsert the listed
    nodes/edges, drop the removed ids) reproduces the server graph.
    """
    if since >= graph.revision:
        return {"revision": graph.revision, "nodes": [], "edges": [],
                "removed_nodes": [], "removed_edges": [], "full": False}
    touched_nodes: set[str] = set()
    touched_edges: set[str] = set()
    removed_nodes: set[str] = set()
    removed_edges: set[str] = set()
    known = since > 0 and any(rec["revision"] == since for rec in graph.op_log) or since == 0
    if not known:
        # client revision predates our log knowledge; send everything
        return {
            "revision": graph.revision,
            "nodes": [graph.nodes[n].to_dict() for n in sorted(graph.nodes)],
            "edges": [graph.edges[e].to_dict() for e in sorted(graph.edges)],
            "removed_nodes": [], "removed_edges": [], "full": True,
        }
    for rec in graph.op_log:
        if rec["revision"] <= since:
            continue
        kind = rec["kind"]
        if kind == "add_node" or kind == "update_node":
            touched_nodes.add(rec["node"])
        elif kind == "add_edge":
            touched_edges.add(rec["edge"])
        elif kind == "delete_edge":
            removed_edges.add(rec["edge"])
        elif kind == "delete_node":
            removed_nodes.update(rec["removed"])
        elif kind in ("group", "ungroup"):
            touched_nodes.update(rec.get("members", []))
    live_nodes = [graph.nodes[n].to_dict() for n in sorted(touched_nodes) if n in graph.nodes]
    live_edges = [graph.edges[e].to_dict() for e in sorted(touched_edges) if e in graph.edges]
    return {
        "revision": graph.revision,
        "nodes": live_nodes,
        "edges": live_edges,
        "removed_nodes": sorted(n for n in removed_nodes if n not in graph.nodes),
        "removed_edges": sorted(
            set(removed_edges)
            | {e for e in _edges_gone(graph, since)}
        ),
        "full": False,
    }


def _edges_gone(graph: KnowledgeGraph, since: int) -> set[str]:
    """Edge ids created at or before `since` that no longer exist."""
    created: dict[str, int] = {}
    deleted: set[str] = set()
    for rec in graph.op_log:
        if rec["kind"] == "add_edge":
            created[rec["edge"]] = rec["revision"]
    for eid, rev in created.items():
        if rev <= since and eid not in graph.edges:
            deleted.add(eid)
    return deleted


# ------------------------------------------------------------------- HTTP API

class ChatBody(BaseModel):
    input: str
    focus_node: str | None = None


class UploadBody(BaseModel):
    title: str | None = None
    body: str
    target_words: int = 300


class ActionBody(BaseModel):
    action: str
    input: str | None = None


class OpsBody(BaseModel):
    base_revision: int
    ops: list[dict]


def create_app(provider, data_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="cograph")
    manager = SessionManager(provider, data_dir)
    app.state.manager = manager

    def _session_or_404(session_id: str) -> Session | JSONResponse:
        session = manager.get(session_id)
        if session is None:
            return JSONResponse(status_code=404, content={"error": "unknown session"})
        return session

    @app.post("/sessions")
    def create_session():
        session = manager.create()
        return {"session_id": session.id, "revision": session.graph.revision}

    @app.post("/sessions/{session_id}/documents")
    def upload_document(session_id: str, body: UploadBody):
        session = _session_or_404(session_id)
        if isinstance(session, JSONResponse):
            return session
        with session.lock:
            try:
                if body.title:
                    doc_id, count = session.store.ingest(
                        body.title, body.body, ChunkConfig(target_words=body.target_words)
                    )
                else:
                    doc_id, count = session.store.ingest_text(
                        body.body, config=ChunkConfig(target_words=body.target_words)
                    )
                session.rebuild_tree()
            except EmptyDocument as exc:
                return JSONResponse(status_code=422, content={"error": str(exc)})
            except ProviderFailure as exc:
                return JSONResponse(
                    status_code=502, content={"error": str(exc), "stage": "ingest"}
                )
        return {"doc_id": doc_id, "chunks": count}

    @app.get("/sessions/{session_id}/graph")
    def get_graph(session_id: str, since: int = -1):
        session = _session_or_404(session_id)
        if isinstance(session, JSONResponse):
            return session
        if since < 0:
            return {"revision": session.graph.revision,
                    "graph": session.graph.to_dict()}
        return graph_delta(session.graph, since)

    @app.post("/sessions/{session_id}/chat")
    def post_chat(session_id: str, body: ChatBody):
        session = _session_or_404(session_id)
        if isinstance(session, JSONResponse):
            return session
        with session.lock:
            since = session.graph.revision
            if body.focus_node is not None and body.focus_node not in session.graph.nodes:
                return JSONResponse(status_code=404, content={"error": "unknown node"})
            try:
                response = session.oracle.handle(body.input, focus_node=body.focus_node)
            except ProviderFailure as exc:
                return JSONResponse(
                    status_code=502, content={"error": str(exc), "stage": "oracle"}
                )
            delta = graph_delta(session.graph, since)
        return {
            "text": response.text,
            "applied_ops": response.applied_ops,
            "revision": response.revision,
            "error": response.error,
            "graph_delta": delta,
        }

    @app.post("/sessions/{session_id}/nodes/{node_id}/action")
    def node_action(session_id: str, node_id: str, body: ActionBody):
        session = _session_or_404(session_id)
        if isinstance(session, JSONResponse):
            return session
        with session.lock:
            if node_id not in session.graph.nodes:
                return JSONResponse(status_code=404, content={"error": "unknown node"})
            since = session.graph.revision
            node = session.graph.nodes[node_id]
            try:
                if body.action == "star":
                    session.graph.update_node(node_id, {"starred": not node.starred})
                    payload = {"starred": session.graph.nodes[node_id].starred}
                elif body.action == "delete":
                    removed = session.graph.delete_node(node_id, orphan_policy="detach")
                    payload = {"removed": removed}
                elif body.action == "suggest":
                    existing = session.suggestion_cache.get(node_id, [])
                    fresh = suggest(session.provider, session.graph, node_id, existing, "")
                    session.suggestion_cache[node_id] = existing + fresh
                    payload = {"suggestions": [s.to_dict() for s in fresh]}
                elif body.action == "expand":
                    text = body.input or f"Tell me more about {node.title}"
                    response = session.oracle.handle(text, focus_node=node_id)
                    payload = {"text": response.text, "applied_ops": response.applied_ops}
                else:
                    return JSONResponse(status_code=422, content={"error": "unknown action"})
            except ProviderFailure as exc:
                return JSONResponse(
                    status_code=502, content={"error": str(exc), "stage": body.action}
                )
            except CographError as exc:
                return JSONResponse(status_code=422, content={"error": str(exc)})
            payload["revision"] = session.graph.revision
            payload["graph_delta"] = graph_delta(session.graph, since)
        return payload

    @app.post("/sessions/{session_id}/ops")
    def apply_ops(session_id: str, body: OpsBody):
        session = _session_or_404(session_id)
        if isinstance(session, JSONResponse):
            return session
        with session.lock:
            if body.base_revision != session.graph.revision:
                return JSONResponse(
                    status_code=409,
                    content={"error": "stale revision",
                             "revision": session.graph.revision},
                )
            since = session.graph.revision
            applied = []
            for raw in body.ops:
                try:
                    op = PlanOp(kind=raw["kind"], args=[str(a) for a in raw["args"]])
                    applied.append(apply_op(session.graph, op))
                except (KeyError, CographError) as exc:
                    return JSONResponse(
                        status_code=422,
                        content={"error": str(exc), "applied": applied,
                                 "revision": session.graph.revision},
                    )
            delta = graph_delta(session.graph, since)
        return {"applied": applied, "revision": session.graph.revision, "graph_delta": delta}

    @app.get("/sessions/{session_id}/layout")
    def get_layout(session_id: str, full: bool = False):
        session = _session_or_404(session_id)
        if isinstance(session, JSONResponse):
            return session
        positions = session.graph.layout(full=full)
        if full:
            with session.lock:
                for nid, pos in positions.items():
                    session.graph.update_node(nid, {"position": pos})
        return {"positions": {nid: list(p) for nid, p in positions.items()},
                "revision": session.graph.revision}

    @app.post("/sessions/{session_id}/save")
    def save_session(session_id: str):
        session = _session_or_404(session_id)
        if isinstance(session, JSONResponse):
            return session
        with session.lock:
            path = manager.save(session)
        return {"path": path, "revision": session.graph.revision}

    @app.post("/sessions/{session_id}/load")
    def load_session(session_id: str):
        try:
            session = manager.load(session_id)
        except FileNotFoundError:
            return JSONResponse(status_code=404, content={"error": "no saved session"})
        return {"session_id": session.id, "revision": session.graph.revision}

    return app
