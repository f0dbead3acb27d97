"""Hierarchical retrieval index: recursive clustering + summarization.

Level 0 holds the ingested chunks. Each higher level clusters the previous
level's embeddings (k-means, k = ceil(n/5), fixed seed, hard assignment) and
summarizes every cluster's member texts through the provider. Building stops
when one cluster remains or the level cap is reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans

from .errors import EmbeddingFailure, EmptyTree, ProviderFailure, SummaryFailure
from .ingest import Chunk, cosine
from .provider import CompletionRequest


@dataclass
class TreeNode:
    id: str
    level: int
    text: str
    embedding: np.ndarray
    children: list[str] = field(default_factory=list)
    chunk_id: str | None = None  # set iff level == 0


@dataclass
class ClusterConfig:
    max_levels: int = 4
    members_per_cluster: int = 5
    seed: int = 0


class ChunkTree:
    def __init__(self):
        self.nodes: dict[str, TreeNode] = {}
        self.roots: list[str] = []
        self.max_level = 0

    def leaves(self) -> list[TreeNode]:
        return sorted((n for n in self.nodes.values() if n.level == 0), key=lambda n: n.id)

    def leaf_descendants(self, node_id: str) -> list[str]:
        """Leaf chunk ids under a node, in deterministic order."""
        node = self.nodes[node_id]
        if node.level == 0:
            return [node.chunk_id]
        out: list[str] = []
        for child in node.children:
            out.extend(self.leaf_descendants(child))
        return out

    def to_dict(self) -> dict:
        return {
            "max_level": self.max_level,
            "roots": self.roots,
            "nodes": [
                {
                    "id": n.id,
                    "level": n.level,
                    "text": n.text,
                    "embedding": n.embedding.tolist(),
                    "children": n.children,
                    "chunk_id": n.chunk_id,
                }
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ChunkTree":
        tree = cls()
        tree.max_level = doc["max_level"]
        tree.roots = list(doc["roots"])
        for nd in doc["nodes"]:
            tree.nodes[nd["id"]] = TreeNode(
                id=nd["id"], level=nd["level"], text=nd["text"],
                embedding=np.asarray(nd["embedding"], dtype=np.float64),
                children=list(nd["children"]), chunk_id=nd["chunk_id"],
            )
        return tree


def build_tree(chunks: list[Chunk], provider, config: ClusterConfig | None = None) -> ChunkTree:
    if not chunks:
        raise EmptyTree("cannot build a tree from zero chunks")
    config = config or ClusterConfig()
    tree = ChunkTree()
    current: list[str] = []
    for chunk in sorted(chunks, key=lambda c: c.id):
        if chunk.embedding is None:
            raise EmbeddingFailure(f"chunk {chunk.id} has no embedding")
        tid = f"t{len(tree.nodes) + 1}"
        tree.nodes[tid] = TreeNode(
            id=tid, level=0, text=chunk.text,
            embedding=np.asarray(chunk.embedding, dtype=np.float64), chunk_id=chunk.id,
        )
        current.append(tid)

    level = 0
    while len(current) > 1 and level < config.max_levels:
        level += 1
        n = len(current)
        k = math.ceil(n / config.members_per_cluster)
        matrix = np.stack([tree.nodes[t].embedding for t in current])
        labels = (
            KMeans(n_clusters=k, n_init=10, random_state=config.seed).fit_predict(matrix)
            if k > 1
            else np.zeros(n, dtype=int)
        )
        try:
            next_level: list[str] = []
            for cluster in range(k):
                members = [t for t, lab in zip(current, labels) if lab == cluster]
                if not members:
                    continue
                passages = "\n\n".join(tree.nodes[m].text for m in members)
                summary = provider.complete(
                    CompletionRequest.from_template("summarize", passages=passages)
                )
                if not summary.strip():
                    raise SummaryFailure(f"empty summary for cluster {cluster} at level {level}")
                embedding = provider.embed([summary])[0]
                tid = f"t{len(tree.nodes) + 1}"
                tree.nodes[tid] = TreeNode(
                    id=tid, level=level, text=summary,
                    embedding=np.asarray(embedding, dtype=np.float64), children=members,
                )
                next_level.append(tid)
        except ProviderFailure as exc:
            raise SummaryFailure(f"tree build aborted at level {level}: {exc}") from exc
        current = next_level

    tree.roots = current
    tree.max_level = max(tree.nodes[t].level for t in tree.nodes)
    return tree


GRANULARITIES = ("broad", "detailed", "collapsed")


def retrieve(tree: ChunkTree, query_embedding: np.ndarray, granularity: str = "collapsed",
             k: int = 8) -> list[tuple[TreeNode, float]]:
    """Rank tree nodes against a query at the requested granularity."""
    if not tree.nodes:
        raise EmptyTree("retrieve on an empty tree")
    if granularity not in GRANULARITIES:
        raise ValueError(f"invalid granularity: {granularity}")
    if granularity == "detailed":
        pool = [n for n in tree.nodes.values() if n.level == 0]
    elif granularity == "broad":
        floor = math.ceil(tree.max_level / 2)
        pool = [n for n in tree.nodes.values() if n.level >= floor]
    else:
        pool = list(tree.nodes.values())
    q = np.asarray(query_embedding, dtype=np.float64)
    scored = [(n, cosine(q, n.embedding)) for n in pool]
    scored.sort(key=lambda x: (-x[1], x[0].id))
    return scored[:k]
