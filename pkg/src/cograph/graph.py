"""Co-created knowledge graph: nodes, labeled directed edges, hierarchy, layout,
and canonical serialization.

The hierarchy is a multi-parent DAG. Every mutation bumps the revision counter
and appends a record to the internal op log (used by tests and delta sync,
never exposed as undo history).
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field, replace

from .errors import (
    CyclicGraph,
    DuplicateEdge,
    EmptyPatch,
    EmptyTitle,
    MalformedDocument,
    UnknownNode,
    UnknownParent,
    WouldCreateCycle,
)

ORIGIN_DOCUMENT = "document-derived"
ORIGIN_USER = "user-contributed"
_ORIGINS = (ORIGIN_DOCUMENT, ORIGIN_USER)

_WORD_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


@dataclass
class Node:
    id: str
    title: str
    detail: str = ""
    origin: str = ORIGIN_DOCUMENT
    starred: bool = False
    position: tuple[float, float] | None = None
    group: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "detail": self.detail,
            "origin": self.origin,
            "starred": self.starred,
            "position": list(self.position) if self.position is not None else None,
            "group": self.group,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Node":
        pos = d.get("position")
        return cls(
            id=d["id"],
            title=d["title"],
            detail=d.get("detail", ""),
            origin=d.get("origin", ORIGIN_DOCUMENT),
            starred=bool(d.get("starred", False)),
            position=(float(pos[0]), float(pos[1])) if pos is not None else None,
            group=d.get("group"),
        )


@dataclass
class Edge:
    id: str
    parent: str
    child: str
    label: str = ""

    def to_dict(self) -> dict:
        return {"id": self.id, "parent": self.parent, "child": self.child, "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "Edge":
        return cls(id=d["id"], parent=d["parent"], child=d["child"], label=d.get("label", ""))


@dataclass
class LayoutConfig:
    column_spacing: float = 260.0
    row_spacing: float = 120.0


class KnowledgeGraph:
    """Mutable knowledge graph with monotone revision and acyclic hierarchy."""

    def __init__(self):
        self.nodes: dict[str, Node] = {}
        self.edges: dict[str, Edge] = {}
        self.groups: dict[str, set[str]] = {}
        self.revision = 0
        self._next_node = 1
        self._next_edge = 1
        self._next_group = 1
        # append-only mutation log: (revision, kind, payload)
        self.op_log: list[dict] = []

    # ------------------------------------------------------------------ basics

    def _new_node_id(self) -> str:
        nid = f"n{self._next_node}"
        self._next_node += 1
        return nid

    def _new_edge_id(self) -> str:
        eid = f"e{self._next_edge}"
        self._next_edge += 1
        return eid

    def _bump(self, kind: str, **payload) -> None:
        self.revision += 1
        self.op_log.append({"revision": self.revision, "kind": kind, **payload})

    def require_node(self, node_id: str) -> Node:
        node = self.nodes.get(node_id)
        if node is None:
            raise UnknownNode(f"no such node: {node_id}")
        return node

    def parents_of(self, node_id: str) -> list[str]:
        return sorted(e.parent for e in self.edges.values() if e.child == node_id)

    def children_of(self, node_id: str) -> list[str]:
        return sorted(e.child for e in self.edges.values() if e.parent == node_id)

    def edges_of(self, node_id: str) -> list[Edge]:
        return sorted(
            (e for e in self.edges.values() if node_id in (e.parent, e.child)),
            key=lambda e: e.id,
        )

    def roots(self) -> list[str]:
        with_parent = {e.child for e in self.edges.values()}
        return sorted(n for n in self.nodes if n not in with_parent)

    def adjacency_matrix(self) -> tuple[list[str], list[list[int]]]:
        """Derived adjacency view (row = parent, col = child)."""
        ids = sorted(self.nodes)
        index = {nid: i for i, nid in enumerate(ids)}
        mat = [[0] * len(ids) for _ in ids]
        for e in self.edges.values():
            mat[index[e.parent]][index[e.child]] = 1
        return ids, mat

    # --------------------------------------------------------------- mutations

    def add_node(
        self,
        title: str,
        detail: str = "",
        origin: str = ORIGIN_DOCUMENT,
        parent: str | None = None,
        label: str = "",
    ) -> str:
        if not title or not title.strip():
            raise EmptyTitle("node title must be non-empty")
        if origin not in _ORIGINS:
            raise ValueError(f"invalid origin: {origin}")
        if parent is not None and parent not in self.nodes:
            raise UnknownParent(f"no such parent: {parent}")
        nid = self._new_node_id()
        self.nodes[nid] = Node(id=nid, title=title.strip(), detail=detail, origin=origin)
        self._bump("add_node", node=nid, title=title.strip())
        if parent is not None:
            self.add_edge(parent, nid, label)
        return nid

    def add_edge(self, parent: str, child: str, label: str = "") -> str:
        if parent not in self.nodes:
            raise UnknownNode(f"no such node: {parent}")
        if child not in self.nodes:
            raise UnknownNode(f"no such node: {child}")
        if parent == child:
            raise WouldCreateCycle("self-edge not allowed")
        for e in self.edges.values():
            if e.parent == parent and e.child == child:
                raise DuplicateEdge(f"edge {parent}->{child} already exists")
        if self._reachable(child, parent):
            raise WouldCreateCycle(f"edge {parent}->{child} would create a cycle")
        eid = self._new_edge_id()
        self.edges[eid] = Edge(id=eid, parent=parent, child=child, label=label)
        self._bump("add_edge", edge=eid, parent=parent, child=child)
        return eid

    def delete_edge(self, parent: str, child: str) -> str:
        for e in list(self.edges.values()):
            if e.parent == parent and e.child == child:
                del self.edges[e.id]
                self._bump("delete_edge", edge=e.id, parent=parent, child=child)
                return e.id
        raise UnknownNode(f"no edge {parent}->{child}")

    def delete_node(self, node_id: str, orphan_policy: str = "detach") -> list[str]:
        self.require_node(node_id)
        if orphan_policy not in ("detach", "cascade"):
            raise ValueError(f"invalid orphan policy: {orphan_policy}")
        removed = {node_id}
        if orphan_policy == "cascade":
            descendants = self._descendants(node_id)
            survivors = set(self.nodes) - descendants - {node_id}
            # a descendant survives iff reachable from a surviving node
            kept: set[str] = set()
            frontier = deque(
                e.child
                for e in self.edges.values()
                if e.parent in survivors and e.child in descendants
            )
            while frontier:
                d = frontier.popleft()
                if d in kept:
                    continue
                kept.add(d)
                for e in self.edges.values():
                    if e.parent == d and e.child in descendants and e.child not in kept:
                        frontier.append(e.child)
            removed |= descendants - kept
        for nid in removed:
            del self.nodes[nid]
            for gid, members in self.groups.items():
                members.discard(nid)
        for eid in [e.id for e in self.edges.values() if e.parent in removed or e.child in removed]:
            del self.edges[eid]
        self.groups = {g: m for g, m in self.groups.items() if m}
        self._bump("delete_node", node=node_id, removed=sorted(removed), policy=orphan_policy)
        return sorted(removed)

    _PATCHABLE = ("title", "detail", "starred", "position")

    def update_node(self, node_id: str, patch: dict) -> None:
        node = self.require_node(node_id)
        if not patch:
            raise EmptyPatch("empty patch")
        bad = [k for k in patch if k not in self._PATCHABLE]
        if bad:
            raise EmptyPatch(f"unpatchable fields: {bad}")
        if "title" in patch and (not patch["title"] or not str(patch["title"]).strip()):
            raise EmptyTitle("node title must be non-empty")
        if "title" in patch:
            node.title = str(patch["title"]).strip()
        if "detail" in patch:
            node.detail = str(patch["detail"])
        if "starred" in patch:
            node.starred = bool(patch["starred"])
        if "position" in patch:
            pos = patch["position"]
            node.position = (float(pos[0]), float(pos[1])) if pos is not None else None
        self._bump("update_node", node=node_id, fields=sorted(patch))

    # ------------------------------------------------------------------ groups

    def group_nodes(self, node_ids: list[str]) -> str:
        for nid in node_ids:
            self.require_node(nid)
        gid = f"g{self._next_group}"
        self._next_group += 1
        self.groups[gid] = set(node_ids)
        for nid in node_ids:
            self.nodes[nid].group = gid
        self._bump("group", group=gid, members=sorted(node_ids))
        return gid

    def ungroup(self, group_id: str) -> None:
        members = self.groups.pop(group_id, None)
        if members is None:
            raise UnknownNode(f"no such group: {group_id}")
        for nid in members:
            if nid in self.nodes:
                self.nodes[nid].group = None
        self._bump("ungroup", group=group_id)

    # --------------------------------------------------------------- traversal

    def _reachable(self, start: str, target: str) -> bool:
        seen = {start}
        stack = [start]
        while stack:
            cur = stack.pop()
            if cur == target:
                return True
            for e in self.edges.values():
                if e.parent == cur and e.child not in seen:
                    seen.add(e.child)
                    stack.append(e.child)
        return False

    def _descendants(self, node_id: str) -> set[str]:
        out: set[str] = set()
        stack = [node_id]
        while stack:
            cur = stack.pop()
            for e in self.edges.values():
                if e.parent == cur and e.child not in out:
                    out.add(e.child)
                    stack.append(e.child)
        return out

    def has_cycle(self) -> bool:
        indeg = {n: 0 for n in self.nodes}
        for e in self.edges.values():
            indeg[e.child] += 1
        queue = deque(n for n, d in indeg.items() if d == 0)
        seen = 0
        while queue:
            cur = queue.popleft()
            seen += 1
            for e in self.edges.values():
                if e.parent == cur:
                    indeg[e.child] -= 1
                    if indeg[e.child] == 0:
                        queue.append(e.child)
        return seen != len(self.nodes)

    def depths(self) -> dict[str, int]:
        """Depth = max parent depth + 1; roots at 0. Requires acyclic graph."""
        if self.has_cycle():
            raise CyclicGraph("graph has a directed cycle")
        depth = {n: 0 for n in self.roots()}
        indeg = {n: len([e for e in self.edges.values() if e.child == n]) for n in self.nodes}
        queue = deque(self.roots())
        while queue:
            cur = queue.popleft()
            for e in self.edges.values():
                if e.parent == cur:
                    depth[e.child] = max(depth.get(e.child, 0), depth[cur] + 1)
                    indeg[e.child] -= 1
                    if indeg[e.child] == 0:
                        queue.append(e.child)
        return depth

    # ------------------------------------------------------------------ search

    def find_anchor(self, phrase: str) -> list[tuple[str, float]]:
        """Rank nodes by lexical overlap with `phrase`, title before detail."""
        query = set(tokenize(phrase))
        if not query:
            return []
        scored = []
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            title_tokens = set(tokenize(node.title))
            detail_tokens = set(tokenize(node.detail))
            t = len(query & title_tokens) / len(query)
            d = len(query & detail_tokens) / len(query)
            if t == 0 and d == 0:
                continue
            scored.append((nid, (2 * t + d) / 3, t, d))
        scored.sort(key=lambda x: (-x[2], -x[3], x[0]))
        return [(nid, score) for nid, score, _, _ in scored]

    # ------------------------------------------------------------------ layout

    def layout(self, config: LayoutConfig | None = None, full: bool = False) -> dict[str, tuple[float, float]]:
        """Horizontal hierarchical layout: x = depth * column spacing.

        Manual positions are preserved unless ``full`` requests a re-layout.
        """
        config = config or LayoutConfig()
        depth = self.depths()
        columns: dict[int, list[str]] = {}
        for nid in sorted(self.nodes):
            columns.setdefault(depth[nid], []).append(nid)
        positions: dict[str, tuple[float, float]] = {}
        for d, ids in columns.items():
            for row, nid in enumerate(ids):
                positions[nid] = (d * config.column_spacing, row * config.row_spacing)
        if not full:
            for nid, node in self.nodes.items():
                if node.position is not None:
                    positions[nid] = node.position
        return positions

    # ----------------------------------------------------------- serialization

    def to_dict(self) -> dict:
        return {
            "format": "cograph-graph",
            "version": 1,
            "revision": self.revision,
            "next_node": self._next_node,
            "next_edge": self._next_edge,
            "next_group": self._next_group,
            "nodes": [self.nodes[i].to_dict() for i in sorted(self.nodes)],
            "edges": [self.edges[i].to_dict() for i in sorted(self.edges)],
            "groups": [
                {"id": gid, "members": sorted(self.groups[gid])} for gid in sorted(self.groups)
            ],
        }

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, doc: dict) -> "KnowledgeGraph":
        if not isinstance(doc, dict) or doc.get("format") != "cograph-graph":
            raise MalformedDocument("not a graph document")
        try:
            g = cls()
            g.revision = int(doc["revision"])
            g._next_node = int(doc["next_node"])
            g._next_edge = int(doc["next_edge"])
            g._next_group = int(doc.get("next_group", 1))
            for nd in doc["nodes"]:
                node = Node.from_dict(nd)
                g.nodes[node.id] = node
            for ed in doc["edges"]:
                edge = Edge.from_dict(ed)
                if edge.parent not in g.nodes or edge.child not in g.nodes:
                    raise MalformedDocument(f"dangling edge {edge.id}")
                g.edges[edge.id] = edge
            for gd in doc.get("groups", []):
                g.groups[gd["id"]] = set(gd["members"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDocument(str(exc)) from exc
        if g.has_cycle():
            raise MalformedDocument("document encodes a cyclic graph")
        return g

    @classmethod
    def deserialize(cls, text: str) -> "KnowledgeGraph":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(str(exc)) from exc
        return cls.from_dict(doc)

    def copy(self) -> "KnowledgeGraph":
        g = KnowledgeGraph.deserialize(self.serialize())
        g.op_log = list(self.op_log)
        return g

    def structurally_equal(self, other: "KnowledgeGraph") -> bool:
        return self.serialize() == other.serialize()
