"""Language-model provider abstraction.

Two implementations:

* :class:`ScriptedProvider` -- deterministic transcript-backed stand-in used by
  every offline test. Completion requests must match exactly one transcript
  entry (template id + key substring) or fail loudly. Embeddings use the
  seeded-hash scheme below, so the whole system is a pure function of its
  inputs and fixtures.
* :class:`HttpProvider` -- one chat-completion round-trip against an
  OpenAI-compatible endpoint, with bounded retries on transient failure.

Deterministic embedding: dimension 64; ``vec[i] = sum over tokens of
h(seed, token, i)`` where ``h`` maps a blake2b digest to [-1, 1]; the result is
L2-normalized. Order-independent over the token multiset.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ProviderFailure
from .graph import tokenize
from .prompts import render

EMBED_DIM = 64


@dataclass
class CompletionRequest:
    template_id: str
    prompt: str
    slot: str = "utility"  # "planner" or "utility"
    temperature: float = 0.0
    max_tokens: int = 1024

    @classmethod
    def from_template(cls, template_id: str, slot: str = "utility", **values) -> "CompletionRequest":
        return cls(template_id=template_id, prompt=render(template_id, **values), slot=slot)


def hash_embed(text: str, dim: int = EMBED_DIM, seed: int = 0) -> np.ndarray:
    vec = np.zeros(dim, dtype=np.float64)
    # sorted multiset: summation order is fixed, so permuted input is byte-identical
    for token in sorted(tokenize(text)):
        for i in range(dim):
            digest = hashlib.blake2b(
                f"{seed}:{token}:{i}".encode(), digest_size=8
            ).digest()
            vec[i] += int.from_bytes(digest, "big") / 2**63 - 1.0
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


@dataclass
class TranscriptEntry:
    template_id: str
    key: str  # substring that must occur in the rendered prompt
    response: str


class ScriptedProvider:
    """Transcript-backed provider for offline tests.

    ``fallback`` is an optional test hook: a callable ``(request) -> str``
    consulted when no transcript entry matches (useful for bulk fixtures such
    as tree-build summaries). Without it, an unmatched request raises
    ProviderFailure naming the template id.
    """

    def __init__(self, entries: list[TranscriptEntry] | None = None, fallback=None, seed: int = 0):
        self.entries: list[TranscriptEntry] = list(entries or [])
        self.fallback = fallback
        self.seed = seed
        self.requests: list[CompletionRequest] = []

    def add(self, template_id: str, key: str, response: str) -> None:
        self.entries.append(TranscriptEntry(template_id, key, response))

    def complete(self, request: CompletionRequest) -> str:
        self.requests.append(request)
        for entry in self.entries:
            if entry.template_id == request.template_id and entry.key in request.prompt:
                return entry.response
        if self.fallback is not None:
            return self.fallback(request)
        raise ProviderFailure(
            f"no transcript entry matches request for template '{request.template_id}'"
        )

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            raise ProviderFailure("embed() called with no texts")
        return [hash_embed(t, seed=self.seed) for t in texts]


def load_transcript(path: str) -> list[TranscriptEntry]:
    """Parse the plain-text transcript fixture format.

    Format, repeated per entry::

        --- <template_id> | <key substring>
        response line 1
        response line 2
        ...

    The response runs until the next ``---`` header or end of file; a single
    trailing newline is stripped.
    """
    entries: list[TranscriptEntry] = []
    header = None
    lines: list[str] = []

    def flush():
        nonlocal header, lines
        if header is not None:
            template_id, _, key = header.partition("|")
            entries.append(
                TranscriptEntry(template_id.strip(), key.strip(), "\n".join(lines).rstrip("\n"))
            )
        header, lines = None, []

    with open(path, encoding="utf-8") as fh:
        for raw in fh.read().splitlines():
            if raw.startswith("--- "):
                flush()
                header = raw[4:]
            elif header is not None:
                lines.append(raw)
    flush()
    return entries


@dataclass
class ProviderConfig:
    endpoint: str = "https://api.openai.com/v1"
    api_key_env: str = "COGRAPH_API_KEY"
    planner_model: str = "planner"
    utility_model: str = "utility"
    embed_model: str = "embedding"
    timeout: float = 60.0

    @classmethod
    def from_env(cls) -> "ProviderConfig":
        cfg = cls()
        cfg.endpoint = os.environ.get("COGRAPH_ENDPOINT", cfg.endpoint)
        cfg.api_key_env = os.environ.get("COGRAPH_API_KEY_ENV", cfg.api_key_env)
        cfg.planner_model = os.environ.get("COGRAPH_PLANNER_MODEL", cfg.planner_model)
        cfg.utility_model = os.environ.get("COGRAPH_UTILITY_MODEL", cfg.utility_model)
        cfg.embed_model = os.environ.get("COGRAPH_EMBED_MODEL", cfg.embed_model)
        return cfg


class HttpProvider:
    """OpenAI-compatible HTTP backend with two model slots and retry-on-transient."""

    MAX_RETRIES = 2

    def __init__(self, config: ProviderConfig | None = None, client=None):
        import httpx

        self.config = config or ProviderConfig.from_env()
        self._client = client or httpx.Client(timeout=self.config.timeout)
        self._lock = threading.Lock()

    def _headers(self) -> dict:
        key = os.environ.get(self.config.api_key_env, "")
        return {"Authorization": f"Bearer {key}"} if key else {}

    def _post(self, path: str, payload: dict) -> dict:
        import httpx

        last_error: Exception | None = None
        for attempt in range(1 + self.MAX_RETRIES):
            try:
                resp = self._client.post(
                    self.config.endpoint.rstrip("/") + path,
                    json=payload,
                    headers=self._headers(),
                )
                if resp.status_code >= 500:
                    last_error = ProviderFailure(f"HTTP {resp.status_code} from {path}")
                    time.sleep(0.2 * attempt)
                    continue
                if resp.status_code >= 400:
                    raise ProviderFailure(f"HTTP {resp.status_code} from {path}: {resp.text[:200]}")
                return resp.json()
            except httpx.HTTPError as exc:
                last_error = exc
                time.sleep(0.2 * attempt)
        raise ProviderFailure(f"request to {path} failed after retries: {last_error}")

    def complete(self, request: CompletionRequest) -> str:
        model = (
            self.config.planner_model if request.slot == "planner" else self.config.utility_model
        )
        data = self._post(
            "/chat/completions",
            {
                "model": model,
                "messages": [{"role": "user", "content": request.prompt}],
                "temperature": request.temperature,
                "max_tokens": request.max_tokens,
            },
        )
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderFailure(f"malformed completion response: {exc}") from exc

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            raise ProviderFailure("embed() called with no texts")
        data = self._post("/embeddings", {"model": self.config.embed_model, "input": texts})
        try:
            return [np.asarray(item["embedding"], dtype=np.float64) for item in data["data"]]
        except (KeyError, TypeError) as exc:
            raise ProviderFailure(f"malformed embedding response: {exc}") from exc
