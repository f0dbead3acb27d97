"""Adaptive retriever: graph-first answering, query rewriting, hierarchical
retrieval, relevance grading, and source backtracking.

Answers carry inline bracketed citation markers ([1], [2], ...) indexing into
the sources list, which makes backtracking mechanically checkable. When
grading retains zero chunks the pipeline refuses with the literal
"I don't know" instead of fabricating an answer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import EmptyTree, ProviderFailure
from .graph import KnowledgeGraph, tokenize
from .ingest import Chunk, DocumentStore
from .provider import CompletionRequest
from .raptor import ChunkTree, retrieve as tree_retrieve

REFUSAL = "I don't know"

_STOPWORDS = {
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "what", "which",
    "who", "whom", "how", "why", "when", "where", "of", "in", "on", "for", "to",
    "and", "or", "do", "does", "did", "can", "could", "about", "me", "my", "it",
    "its", "this", "that", "these", "those", "tell", "more", "please",
}

_CITATION_RE = re.compile(r"\[(\d+)\]")


@dataclass
class RefinedQuery:
    original: str
    graph_answer: str | None
    refined: str


@dataclass
class GradedEvidence:
    chunk_id: str
    relevant: bool


@dataclass
class SourceRef:
    doc_title: str
    page: int
    chunk_id: str
    char_range: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "doc_title": self.doc_title,
            "page": self.page,
            "chunk_id": self.chunk_id,
            "char_range": list(self.char_range),
        }


@dataclass
class AnsweredQuery:
    answer: str
    sources: list[SourceRef] = field(default_factory=list)
    evidence: list[GradedEvidence] = field(default_factory=list)
    insufficient: bool = False
    refined: RefinedQuery | None = None


def content_tokens(text: str) -> set[str]:
    return {t for t in tokenize(text) if t not in _STOPWORDS}


def query_graph(graph: KnowledgeGraph, user_input: str) -> str | None:
    """Answer from the graph alone when matched nodes cover the query terms."""
    hits = graph.find_anchor(user_input)
    if not hits:
        return None
    wanted = content_tokens(user_input)
    if not wanted:
        return None
    covered: set[str] = set()
    used: list[str] = []
    for nid, _score in hits[:3]:
        node = graph.nodes[nid]
        covered |= set(tokenize(node.title)) | set(tokenize(node.detail))
        used.append(nid)
        if wanted <= covered:
            break
    if not wanted <= covered:
        return None
    lines = []
    for nid in used:
        node = graph.nodes[nid]
        lines.append(f"{node.title}: {node.detail}" if node.detail else node.title)
        for edge in graph.edges_of(nid):
            other = graph.nodes[edge.child if edge.parent == nid else edge.parent]
            direction = "->" if edge.parent == nid else "<-"
            lines.append(f"  {node.title} {direction} [{edge.label}] {other.title}")
    return "\n".join(lines)


def rewrite_query(provider, user_input: str, graph_answer: str | None, history) -> RefinedQuery:
    request = CompletionRequest.from_template(
        "refine_query",
        original_query=user_input,
        graph_response=graph_answer if graph_answer is not None else "(no graph answer)",
    )
    refined = provider.complete(request).strip()
    if not refined:
        refined = user_input
    return RefinedQuery(original=user_input, graph_answer=graph_answer, refined=refined)


def grade(provider, refined: str, candidates: list[Chunk]) -> list[GradedEvidence]:
    if not candidates:
        raise ValueError("grade() needs at least one candidate chunk")
    listing = "\n".join(f"[{i + 1}] {c.text}" for i, c in enumerate(candidates))
    request = CompletionRequest.from_template("grade", query=refined, chunks=listing)
    reply = provider.complete(request)
    labels = [ln.strip().lower() for ln in reply.splitlines() if ln.strip()]
    if len(labels) != len(candidates) or any(
        lab not in ("relevant", "irrelevant") for lab in labels
    ):
        raise ProviderFailure(f"unparseable grading output: {reply!r}")
    return [
        GradedEvidence(chunk_id=c.id, relevant=(lab == "relevant"))
        for c, lab in zip(candidates, labels)
    ]


@dataclass
class RetrieverConfig:
    k: int = 8
    granularity: str = "collapsed"


class Retriever:
    def __init__(self, graph: KnowledgeGraph, store: DocumentStore, tree: ChunkTree | None,
                 provider, config: RetrieverConfig | None = None):
        self.graph = graph
        self.store = store
        self.tree = tree
        self.provider = provider
        self.config = config or RetrieverConfig()

    def _candidate_chunks(self, refined: str, granularity: str) -> list[Chunk]:
        if self.tree is None or not self.tree.nodes:
            raise EmptyTree("no retrieval index; ingest documents first")
        q = self.provider.embed([refined])[0]
        ranked = tree_retrieve(self.tree, q, granularity, self.config.k)
        seen: set[str] = set()
        chunks: list[Chunk] = []
        for node, _score in ranked:
            for cid in self.tree.leaf_descendants(node.id):
                if cid not in seen and cid in self.store.chunks:
                    seen.add(cid)
                    chunks.append(self.store.chunks[cid])
        return chunks

    def _source_ref(self, chunk: Chunk) -> SourceRef:
        doc = self.store.documents[chunk.doc_id]
        return SourceRef(
            doc_title=doc.title, page=chunk.page, chunk_id=chunk.id,
            char_range=(chunk.start, chunk.end),
        )

    def _synthesize(self, refined: str, relevant: list[Chunk]) -> str:
        context = "\n\n".join(f"[{i + 1}] {c.text}" for i, c in enumerate(relevant))
        request = CompletionRequest.from_template("query_kb", question=refined, context=context)
        return self.provider.complete(request)

    def answer(self, user_input: str, granularity: str | None = None, history=()) -> AnsweredQuery:
        granularity = granularity or self.config.granularity
        graph_answer = query_graph(self.graph, user_input)
        refined = rewrite_query(self.provider, user_input, graph_answer, history)
        candidates = self._candidate_chunks(refined.refined, granularity)
        if not candidates:
            return AnsweredQuery(answer=REFUSAL, insufficient=True, refined=refined)
        evidence = grade(self.provider, refined.refined, candidates)
        relevant = [self.store.chunks[e.chunk_id] for e in evidence if e.relevant]
        if not relevant:
            return AnsweredQuery(answer=REFUSAL, evidence=evidence, insufficient=True,
                                 refined=refined)

        draft = self._synthesize(refined.refined, relevant)
        cited = _cited_indices(draft, len(relevant))
        if not cited:
            # hallucination check: one bounded re-synthesis retry
            draft = self._synthesize(refined.refined, relevant)
            cited = _cited_indices(draft, len(relevant))
        if cited:
            sources = [self._source_ref(relevant[i - 1]) for i in cited]
        else:
            # draft never cited retained chunks; fall back to mechanical backtracking
            sources = [self._source_ref(c) for c in relevant]
        return AnsweredQuery(
            answer=draft, sources=sources, evidence=evidence, insufficient=False,
            refined=refined,
        )


def _cited_indices(text: str, n: int) -> list[int]:
    """Distinct in-range citation indices in order of first appearance."""
    out: list[int] = []
    for m in _CITATION_RE.finditer(text):
        i = int(m.group(1))
        if 1 <= i <= n and i not in out:
            out.append(i)
    return out
