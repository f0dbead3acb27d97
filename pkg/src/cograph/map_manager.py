"""Contribution pathway: plan-and-execute with bounded self-correction.

Plans arrive from the provider in a line-oriented mini-language, one operation
per line::

    AddNode("title", "detail", "parent title or id or empty", "edge label")
    AddEdge("parent", "child", "label")
    DeleteNode("node", "detach|cascade")
    DeleteEdge("parent", "child")
    UpdateNode("node", "field", "value")

Arguments are double-quoted strings with backslash escapes; lines starting
with ``#`` are rationale. Node references resolve by id first, then exact
title (case-insensitive), then the anchor search's top hit.

Execution runs each op at most N times, rewriting it through a self-correction
provider call between attempts. After N failures the error is appended to the
history and planning restarts from the current graph state, up to MAX_DEPTH
cycles; then the terminal message "Max attempts reached." is returned.
Succeeded ops keep their effects across replans.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CographError, PlanningFailure, ProviderFailure, UnknownNode
from .graph import ORIGIN_USER, KnowledgeGraph
from .provider import CompletionRequest

TERMINAL_MESSAGE = "Max attempts reached."

OP_KINDS = {"AddNode": 4, "AddEdge": 3, "DeleteNode": (1, 2), "DeleteEdge": 2, "UpdateNode": 3}


class OpSyntaxError(CographError):
    pass


@dataclass
class GraphOp:
    kind: str
    args: list[str]

    def render(self) -> str:
        quoted = ", ".join('"' + a.replace("\\", "\\\\").replace('"', '\\"') + '"'
                           for a in self.args)
        return f"{self.kind}({quoted})"


@dataclass
class Plan:
    ops: list[GraphOp]
    rationale: str = ""


@dataclass
class OpResult:
    op: str
    status: str  # succeeded | corrected | failed
    attempts: int
    error: str | None = None


@dataclass
class ExecutionOutcome:
    results: list[OpResult]
    final_revision: int
    depth_used: int
    message: str
    completed: bool


@dataclass
class MapManagerConfig:
    max_attempts: int = 5   # N in the self-correction loop
    max_depth: int = 3      # replan cycles

    def __post_init__(self):
        if self.max_attempts < 1 or self.max_depth < 1:
            raise ValueError("max_attempts and max_depth must be >= 1")


# ------------------------------------------------------------------- parsing

def parse_op_line(line: str) -> GraphOp:
    """Recursive-descent parse of one `Name("arg", ...)` line."""
    i = 0
    text = line.strip()

    def error(msg: str):
        return OpSyntaxError(f"{msg} in op line: {text!r}")

    name_end = text.find("(")
    if name_end <= 0:
        raise error("missing '('")
    kind = text[:name_end].strip()
    if kind not in OP_KINDS:
        raise error(f"unknown operation {kind!r}")
    i = name_end + 1
    args: list[str] = []
    while True:
        while i < len(text) and text[i] in " \t":
            i += 1
        if i < len(text) and text[i] == ")":
            i += 1
            break
        if i >= len(text) or text[i] != '"':
            raise error("expected quoted argument")
        i += 1
        buf: list[str] = []
        while i < len(text) and text[i] != '"':
            if text[i] == "\\" and i + 1 < len(text):
                buf.append(text[i + 1])
                i += 2
            else:
                buf.append(text[i])
                i += 1
        if i >= len(text):
            raise error("unterminated string")
        i += 1  # closing quote
        args.append("".join(buf))
        while i < len(text) and text[i] in " \t":
            i += 1
        if i < len(text) and text[i] == ",":
            i += 1
        elif i < len(text) and text[i] == ")":
            i += 1
            break
        else:
            raise error("expected ',' or ')'")
    if text[i:].strip():
        raise error("trailing text after ')'")
    arity = OP_KINDS[kind]
    allowed = arity if isinstance(arity, tuple) else (arity,)
    if len(args) not in allowed:
        raise error(f"{kind} takes {allowed} arguments, got {len(args)}")
    return GraphOp(kind=kind, args=args)


def parse_plan(text: str) -> Plan:
    rationale: list[str] = []
    ops: list[GraphOp] = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            rationale.append(stripped.lstrip("# "))
            continue
        ops.append(parse_op_line(stripped))
    return Plan(ops=ops, rationale="\n".join(rationale))


# ----------------------------------------------------------------- resolution

def resolve_node(graph: KnowledgeGraph, ref: str) -> str:
    """Node reference -> node id (id, exact title, then anchor top hit)."""
    if ref in graph.nodes:
        return ref
    lowered = ref.strip().lower()
    for nid in sorted(graph.nodes):
        if graph.nodes[nid].title.lower() == lowered:
            return nid
    hits = graph.find_anchor(ref)
    if hits:
        return hits[0][0]
    raise UnknownNode(f"no node matches reference {ref!r}")


def apply_op(graph: KnowledgeGraph, op: GraphOp, origin: str = ORIGIN_USER) -> dict:
    """Validate and apply one op atomically; returns a delta record."""
    if op.kind == "AddNode":
        title, detail, parent_ref, label = op.args
        parent = resolve_node(graph, parent_ref) if parent_ref.strip() else None
        nid = graph.add_node(title, detail, origin=origin, parent=parent, label=label)
        return {"op": "AddNode", "node": nid, "parent": parent}
    if op.kind == "AddEdge":
        parent_ref, child_ref, label = op.args
        parent = resolve_node(graph, parent_ref)
        child = resolve_node(graph, child_ref)
        eid = graph.add_edge(parent, child, label)
        return {"op": "AddEdge", "edge": eid, "parent": parent, "child": child}
    if op.kind == "DeleteNode":
        ref = op.args[0]
        policy = op.args[1] if len(op.args) == 2 else "detach"
        nid = resolve_node(graph, ref)
        removed = graph.delete_node(nid, orphan_policy=policy)
        return {"op": "DeleteNode", "removed": removed}
    if op.kind == "DeleteEdge":
        parent = resolve_node(graph, op.args[0])
        child = resolve_node(graph, op.args[1])
        eid = graph.delete_edge(parent, child)
        return {"op": "DeleteEdge", "edge": eid}
    if op.kind == "UpdateNode":
        ref, fld, value = op.args
        nid = resolve_node(graph, ref)
        patch: dict = {fld: value}
        if fld == "starred":
            patch = {"starred": value.strip().lower() in ("true", "1", "yes")}
        elif fld == "position":
            try:
                x, y = (float(p) for p in value.split(","))
            except ValueError as exc:
                raise OpSyntaxError(f"position must be 'x,y': {value!r}") from exc
            patch = {"position": (x, y)}
        graph.update_node(nid, patch)
        return {"op": "UpdateNode", "node": nid, "field": fld}
    raise OpSyntaxError(f"unknown op kind {op.kind}")


# ------------------------------------------------------------------ pipeline

def graph_state_text(graph: KnowledgeGraph) -> str:
    lines = [f"{nid}: {graph.nodes[nid].title}" for nid in sorted(graph.nodes)]
    for eid in sorted(graph.edges):
        e = graph.edges[eid]
        lines.append(f"{e.parent} -[{e.label}]-> {e.child}")
    return "\n".join(lines) or "(empty graph)"


def history_text(history) -> str:
    turns = list(history) if history else []
    return "\n".join(f"{role}: {text}" for role, text in turns) or "(none)"


class MapManager:
    def __init__(self, provider, config: MapManagerConfig | None = None):
        self.provider = provider
        self.config = config or MapManagerConfig()
        # append-only execution log used by the replay harness
        self.op_log: list[dict] = []

    def plan(self, user_input: str, graph: KnowledgeGraph, history) -> Plan:
        request = CompletionRequest.from_template(
            "plan_ops", slot="planner",
            graph_state=graph_state_text(graph),
            history=history_text(history),
            request=user_input,
        )
        reply = self.provider.complete(request)
        try:
            plan = parse_plan(reply)
        except OpSyntaxError as first_error:
            # one re-ask, then give up
            reply = self.provider.complete(request)
            try:
                plan = parse_plan(reply)
            except OpSyntaxError:
                raise PlanningFailure(f"planner output unparseable: {first_error}") from first_error
        if not plan.ops:
            raise PlanningFailure("planner produced an empty plan")
        return plan

    def self_correct(self, op: GraphOp, error: str, history) -> GraphOp:
        request = CompletionRequest.from_template(
            "self_correct", slot="planner",
            op=op.render(), error=error, history=history_text(history),
        )
        reply = self.provider.complete(request).strip()
        return parse_op_line(reply.splitlines()[0] if reply else "")

    def execute_with_self_correction(self, plan: Plan, graph: KnowledgeGraph, history,
                                     user_input: str = "") -> ExecutionOutcome:
        cfg = self.config
        history = list(history)
        results: list[OpResult] = []
        depth = 0
        ops = list(plan.ops)
        while depth < cfg.max_depth:
            depth += 1
            replan_needed = False
            remaining = list(ops)
            for op in remaining:
                attempts = 0
                last_error = ""
                succeeded = False
                current = op
                while attempts < cfg.max_attempts:
                    attempts += 1
                    try:
                        apply_op(graph, current)
                        self.op_log.append({
                            "cycle": depth, "op": current.render(),
                            "attempt": attempts, "ok": True,
                        })
                        succeeded = True
                        break
                    except CographError as exc:
                        last_error = str(exc)
                        self.op_log.append({
                            "cycle": depth, "op": current.render(),
                            "attempt": attempts, "ok": False, "error": last_error,
                        })
                        if attempts >= cfg.max_attempts:
                            break
                        try:
                            current = self.self_correct(current, last_error, history)
                        except (OpSyntaxError, ProviderFailure) as corr_exc:
                            # an unusable correction consumes the remaining attempts
                            last_error = f"self-correction failed: {corr_exc}"
                            break
                if succeeded:
                    status = "succeeded" if attempts == 1 else "corrected"
                    results.append(OpResult(op=current.render(), status=status, attempts=attempts))
                else:
                    results.append(OpResult(op=current.render(), status="failed",
                                            attempts=attempts, error=last_error))
                    history.append(("system", f"operation failed: {current.render()}: {last_error}"))
                    replan_needed = True
                    break
            if not replan_needed:
                return ExecutionOutcome(
                    results=results, final_revision=graph.revision, depth_used=depth,
                    message=format_response(results), completed=True,
                )
            if depth >= cfg.max_depth:
                break
            try:
                new_plan = self.plan(user_input, graph, history)
            except PlanningFailure as exc:
                return ExecutionOutcome(
                    results=results, final_revision=graph.revision, depth_used=depth,
                    message=f"Replanning failed: {exc}", completed=False,
                )
            ops = list(new_plan.ops)
        return ExecutionOutcome(
            results=results, final_revision=graph.revision, depth_used=depth,
            message=TERMINAL_MESSAGE, completed=False,
        )

    def handle_contribution(self, user_input: str, graph: KnowledgeGraph, history) -> ExecutionOutcome:
        plan = self.plan(user_input, graph, history)
        return self.execute_with_self_correction(plan, graph, history, user_input=user_input)


def format_response(results: list[OpResult]) -> str:
    lines = ["Applied the following operations:"]
    for r in results:
        if r.status == "succeeded":
            lines.append(f"- {r.op}")
        elif r.status == "corrected":
            lines.append(f"- {r.op} (after {r.attempts} attempts)")
        else:
            lines.append(f"- FAILED {r.op}: {r.error}")
    return "\n".join(lines)
