"""Document upload, chunking, and exact vector search.

Chunks tile the document body exactly: concatenating a document's chunk texts
in range order reproduces the body byte for byte. Page indices are synthesized
from explicit page-break markers (form-feed characters) in the body; chunk.page
is 1 plus the count of page breaks at or before the chunk start.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyDocument

PAGE_BREAK = "\f"

_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")


@dataclass
class Document:
    id: str
    title: str
    body: str
    page_breaks: list[int] = field(default_factory=list)


@dataclass
class Chunk:
    id: str
    doc_id: str
    start: int
    end: int
    text: str
    page: int
    embedding: np.ndarray | None = None


@dataclass
class ChunkConfig:
    target_words: int = 300


def split_front_matter(raw: str) -> tuple[str | None, str]:
    """Pop an optional ``Title: ...`` front-matter first line off a document."""
    first, sep, rest = raw.partition("\n")
    if first.lower().startswith("title:"):
        return first[len("title:"):].strip(), rest
    return None, raw


def sentence_spans(body: str) -> list[tuple[int, int]]:
    """Contiguous sentence spans tiling the whole body."""
    cuts = [m.end() for m in _SENTENCE_END.finditer(body)]
    starts = [0] + cuts
    ends = cuts + [len(body)]
    return [(s, e) for s, e in zip(starts, ends) if s < e]


def chunk_body(body: str, config: ChunkConfig) -> list[tuple[int, int]]:
    """Greedy sentence-aligned chunking toward the target word count."""
    spans = sentence_spans(body)
    if not spans:
        return [(0, len(body))]
    chunks: list[tuple[int, int]] = []
    start = spans[0][0]
    words = 0
    for s, e in spans:
        words += len(body[s:e].split())
        if words >= config.target_words:
            chunks.append((start, e))
            start = e
            words = 0
    if start < len(body):
        chunks.append((start, len(body)))
    # first chunk starts at 0 even if the body has leading whitespace
    if chunks and chunks[0][0] != 0:
        chunks[0] = (0, chunks[0][1])
    return chunks


class VectorIndex:
    """Exhaustive cosine-similarity search over fixed-dimension embeddings."""

    def __init__(self, dim: int):
        self.dim = dim
        self.vectors: dict[str, np.ndarray] = {}

    def add(self, chunk_id: str, embedding: np.ndarray) -> None:
        emb = np.asarray(embedding, dtype=np.float64)
        if emb.shape != (self.dim,):
            raise DimensionMismatch(f"expected dim {self.dim}, got {emb.shape}")
        self.vectors[chunk_id] = emb

    def search(self, query: np.ndarray, k: int) -> list[tuple[str, float]]:
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (self.dim,):
            raise DimensionMismatch(f"expected dim {self.dim}, got {q.shape}")
        scored = [(cid, cosine(q, v)) for cid, v in self.vectors.items()]
        scored.sort(key=lambda x: (-x[1], x[0]))
        return scored[:k]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


class DocumentStore:
    """Holds documents, their chunks, and the vector index."""

    def __init__(self, provider, dim: int = 64):
        self.provider = provider
        self.documents: dict[str, Document] = {}
        self.chunks: dict[str, Chunk] = {}
        self.index = VectorIndex(dim)
        self._next_doc = 1
        self._next_chunk = 1

    def ingest(self, title: str, body: str, config: ChunkConfig | None = None) -> tuple[str, int]:
        if not body.strip():
            raise EmptyDocument("document body is empty")
        config = config or ChunkConfig()
        doc_id = f"d{self._next_doc}"
        self._next_doc += 1
        page_breaks = [i for i, ch in enumerate(body) if ch == PAGE_BREAK]
        doc = Document(id=doc_id, title=title, body=body, page_breaks=page_breaks)
        self.documents[doc_id] = doc

        spans = chunk_body(body, config)
        texts = [body[s:e] for s, e in spans]
        embeddings = self.provider.embed(texts)
        count = 0
        for (s, e), text, emb in zip(spans, texts, embeddings):
            cid = f"c{self._next_chunk}"
            self._next_chunk += 1
            page = bisect.bisect_right(page_breaks, s) + 1
            chunk = Chunk(
                id=cid, doc_id=doc_id, start=s, end=e, text=text, page=page,
                embedding=np.asarray(emb, dtype=np.float64),
            )
            self.chunks[cid] = chunk
            self.index.add(cid, chunk.embedding)
            count += 1
        return doc_id, count

    def ingest_text(self, raw: str, default_title: str = "untitled",
                    config: ChunkConfig | None = None) -> tuple[str, int]:
        """Ingest raw UTF-8 text with an optional front-matter title line."""
        title, body = split_front_matter(raw)
        return self.ingest(title or default_title, body, config)

    def doc_chunks(self, doc_id: str) -> list[Chunk]:
        return sorted(
            (c for c in self.chunks.values() if c.doc_id == doc_id), key=lambda c: c.start
        )

    # ----------------------------------------------------------- serialization

    def to_dict(self) -> dict:
        return {
            "next_doc": self._next_doc,
            "next_chunk": self._next_chunk,
            "dim": self.index.dim,
            "documents": [
                {
                    "id": d.id,
                    "title": d.title,
                    "body": d.body,
                    "page_breaks": d.page_breaks,
                }
                for d in sorted(self.documents.values(), key=lambda d: d.id)
            ],
            "chunks": [
                {
                    "id": c.id,
                    "doc_id": c.doc_id,
                    "start": c.start,
                    "end": c.end,
                    "page": c.page,
                    "embedding": c.embedding.tolist() if c.embedding is not None else None,
                }
                for c in sorted(self.chunks.values(), key=lambda c: c.id)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict, provider) -> "DocumentStore":
        store = cls(provider, dim=doc.get("dim", 64))
        store._next_doc = doc["next_doc"]
        store._next_chunk = doc["next_chunk"]
        for d in doc["documents"]:
            store.documents[d["id"]] = Document(
                id=d["id"], title=d["title"], body=d["body"], page_breaks=list(d["page_breaks"])
            )
        for c in doc["chunks"]:
            body = store.documents[c["doc_id"]].body
            emb = np.asarray(c["embedding"], dtype=np.float64) if c["embedding"] is not None else None
            chunk = Chunk(
                id=c["id"], doc_id=c["doc_id"], start=c["start"], end=c["end"],
                text=body[c["start"]:c["end"]], page=c["page"], embedding=emb,
            )
            store.chunks[chunk.id] = chunk
            if emb is not None:
                store.index.add(chunk.id, emb)
        return store
