"""cograph: human-AI co-construction of knowledge graphs over document corpora."""

from .graph import KnowledgeGraph, Node, Edge, LayoutConfig
from .ingest import DocumentStore, ChunkConfig, VectorIndex
from .raptor import ChunkTree, ClusterConfig, build_tree, retrieve
from .retriever import Retriever, RetrieverConfig, AnsweredQuery
from .oracle import Oracle, ChatHistory, Intent, classify
from .map_manager import MapManager, MapManagerConfig, Plan
from .provider import ScriptedProvider, HttpProvider, CompletionRequest, hash_embed

__all__ = [
    "KnowledgeGraph", "Node", "Edge", "LayoutConfig",
    "DocumentStore", "ChunkConfig", "VectorIndex",
    "ChunkTree", "ClusterConfig", "build_tree", "retrieve",
    "Retriever", "RetrieverConfig", "AnsweredQuery",
    "Oracle", "ChatHistory", "Intent", "classify",
    "MapManager", "MapManagerConfig", "Plan",
    "ScriptedProvider", "HttpProvider", "CompletionRequest", "hash_embed",
]
