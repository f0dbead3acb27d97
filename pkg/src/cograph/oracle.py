"""Central coordinator: intent classification, routing, answer integration,
expansion suggestions, and final response formatting."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CographError, ProviderFailure, UnparseableClassification
from .graph import ORIGIN_DOCUMENT, KnowledgeGraph
from .map_manager import (
    GraphOp,
    MapManager,
    apply_op,
    parse_plan,
    resolve_node,
)
from .provider import CompletionRequest
from .retriever import AnsweredQuery, Retriever, SourceRef

CATEGORIES = ("search", "edit", "expansion")


@dataclass
class Intent:
    category: str
    content: str


class ChatHistory:
    """Bounded chronological window of (role, text) turns."""

    def __init__(self, window: int = 10):
        self.window = window
        self.turns: list[tuple[str, str]] = []

    def add(self, role: str, text: str) -> None:
        self.turns.append((role, text))
        if len(self.turns) > self.window:
            self.turns = self.turns[-self.window:]

    def __iter__(self):
        return iter(self.turns)

    def __len__(self):
        return len(self.turns)

    def as_text(self) -> str:
        return "\n".join(f"{role}: {text}" for role, text in self.turns) or "(none)"


@dataclass
class Suggestion:
    topic: str
    description: str
    relationship: str

    def to_dict(self) -> dict:
        return {"topic": self.topic, "description": self.description,
                "relationship": self.relationship}


@dataclass
class SystemResponse:
    text: str
    applied_ops: list[dict] = field(default_factory=list)
    revision: int = 0
    error: str | None = None


def classify(provider, user_input: str, history: ChatHistory) -> Intent:
    if not user_input.strip():
        raise ValueError("empty input")
    request = CompletionRequest.from_template(
        "parse_query", query=user_input, chat_history=history.as_text()
    )
    for attempt in range(2):
        reply = provider.complete(request)
        intent = _parse_classification(reply)
        if intent is not None:
            return intent
    raise UnparseableClassification(f"classifier output unparseable: {reply!r}")


def _parse_classification(reply: str) -> Intent | None:
    category = content = None
    for line in reply.splitlines():
        key, _, value = line.partition(":")
        key = key.strip().lower()
        if key == "category":
            category = value.strip().lower()
        elif key == "content":
            content = value.strip()
    if category in CATEGORIES and content:
        return Intent(category=category, content=content)
    return None


def integrate_answer(graph: KnowledgeGraph, question: str, answer: str, provider,
                     anchor: str | None = None) -> list[dict]:
    """Extend the graph with key points of an answered query (dedup by title)."""
    if not answer.strip():
        return []
    existing = "\n".join(
        f"{nid}: {graph.nodes[nid].title}" for nid in sorted(graph.nodes)
    ) or "(empty graph)"
    request = CompletionRequest.from_template(
        "update_graph", slot="planner",
        query=question, response=answer, existing_nodes=existing,
    )
    reply = provider.complete(request)
    plan = parse_plan(reply)
    existing_titles = {graph.nodes[n].title.lower() for n in graph.nodes}
    applied: list[dict] = []
    for op in plan.ops:
        if op.kind == "AddNode":
            title = op.args[0].strip()
            if title.lower() in existing_titles:
                continue  # never duplicate an existing title
            if anchor is not None and not op.args[2].strip():
                op = GraphOp(kind="AddNode", args=[op.args[0], op.args[1], anchor, op.args[3]])
            delta = apply_op(graph, op, origin=ORIGIN_DOCUMENT)
            existing_titles.add(title.lower())
        else:
            delta = apply_op(graph, op)
        applied.append(delta)
    return applied


def suggest(provider, graph: KnowledgeGraph, node_id: str,
            existing_suggestions: list[Suggestion], doc_context: str) -> list[Suggestion]:
    node = graph.require_node(node_id)
    existing_nodes = "\n".join(
        f"{nid}: {graph.nodes[nid].title}" for nid in sorted(graph.nodes)
    )
    existing = "; ".join(s.topic for s in existing_suggestions) or "(none)"
    request = CompletionRequest.from_template(
        "suggest",
        existing_nodes=existing_nodes,
        node_info=f"{node.title}: {node.detail}",
        existing_suggestions=existing,
        content=doc_context or "(none)",
    )
    reply = provider.complete(request)
    taken = {s.topic.lower() for s in existing_suggestions}
    out: list[Suggestion] = []
    for line in reply.splitlines():
        if "|" not in line:
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 3 or not parts[0]:
            continue
        topic, description, relationship = parts
        if topic.lower() in taken:
            continue
        taken.add(topic.lower())
        out.append(Suggestion(topic=topic, description=description, relationship=relationship))
        if len(out) == 5:
            break
    return out


def _reference_section(sources: list[SourceRef]) -> str:
    if not sources:
        return ""
    lines = ["References:"]
    for i, s in enumerate(sources, start=1):
        lines.append(f"{i}. {s.doc_title} (page {s.page})")
    return "\n".join(lines)


def finalize(provider, user_input: str, refined: str, answer: str,
             sources: list[SourceRef], node_name: str | None = None) -> str:
    source_listing = "; ".join(f"{s.doc_title} (page {s.page})" for s in sources) or "(none)"
    try:
        request = CompletionRequest.from_template(
            "rewrite_final",
            input=user_input, query=refined, answer=answer,
            sources=source_listing, node_name=node_name or "(none)",
        )
        text = provider.complete(request).strip()
    except ProviderFailure:
        text = answer  # fall back to the unrewritten answer
    refs = _reference_section(sources)
    if refs and "References:" not in text:
        text = f"{text}\n\n{refs}"
    if node_name and node_name not in text.rsplit("\n", 1)[-1]:
        text = f"{text}\n\nNote: this question was asked specifically on the node {node_name}."
    return text


class Oracle:
    def __init__(self, graph: KnowledgeGraph, retriever: Retriever, map_manager: MapManager,
                 provider, history: ChatHistory | None = None):
        self.graph = graph
        self.retriever = retriever
        self.map_manager = map_manager
        self.provider = provider
        self.history = history or ChatHistory()

    def handle(self, user_input: str, focus_node: str | None = None) -> SystemResponse:
        self.history.add("user", user_input)
        try:
            intent = classify(self.provider, user_input, self.history)
            if intent.category == "edit":
                response = self._handle_edit(intent)
            else:
                response = self._handle_query(intent, focus_node)
        except CographError as exc:
            response = SystemResponse(
                text=f"Sorry, that request failed: {exc}",
                revision=self.graph.revision, error=type(exc).__name__,
            )
        self.history.add("assistant", response.text)
        return response

    def _handle_edit(self, intent: Intent) -> SystemResponse:
        outcome = self.map_manager.handle_contribution(
            intent.content, self.graph, list(self.history)
        )
        error = None if outcome.completed else "ExecutionIncomplete"
        applied = [
            {"op": r.op, "status": r.status, "attempts": r.attempts}
            for r in outcome.results if r.status != "failed"
        ]
        return SystemResponse(text=outcome.message, applied_ops=applied,
                              revision=self.graph.revision, error=error)

    def _handle_query(self, intent: Intent, focus_node: str | None) -> SystemResponse:
        answered = self.retriever.answer(intent.content)
        applied: list[dict] = []
        if not answered.insufficient:
            applied = integrate_answer(
                self.graph, intent.content, answered.answer, self.provider,
                anchor=focus_node if intent.category == "expansion" else None,
            )
        node_name = self.graph.nodes[focus_node].title if focus_node in self.graph.nodes else None
        text = finalize(
            self.provider, intent.content,
            answered.refined.refined if answered.refined else intent.content,
            answered.answer, answered.sources, node_name=node_name,
        )
        return SystemResponse(text=text, applied_ops=applied, revision=self.graph.revision)
