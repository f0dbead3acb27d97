import pytest

from cograph.errors import PlanningFailure, UnknownNode
from cograph.graph import ORIGIN_USER, KnowledgeGraph
from cograph.map_manager import (
    TERMINAL_MESSAGE,
    GraphOp,
    MapManager,
    MapManagerConfig,
    OpSyntaxError,
    apply_op,
    parse_op_line,
    parse_plan,
    resolve_node,
)
from cograph.provider import ScriptedProvider


# ------------------------------------------------------------------- parsing

def test_parse_op_line_basic():
    op = parse_op_line('AddNode("Solar Power", "renewable energy", "Energy", "is a type of")')
    assert op.kind == "AddNode"
    assert op.args == ["Solar Power", "renewable energy", "Energy", "is a type of"]


def test_parse_op_line_escapes_and_render_round_trip():
    op = parse_op_line('AddEdge("A \\"quoted\\"", "B", "rel")')
    assert op.args[0] == 'A "quoted"'
    assert parse_op_line(op.render()) == op


@pytest.mark.parametrize("bad", [
    "AddNode(",
    'AddNode("only one")',
    'Frobnicate("x")',
    'AddEdge("a", "b", "c") extra',
    'AddEdge("a", "b"',
    "AddEdge(a, b, c)",
])
def test_parse_op_line_rejects(bad):
    with pytest.raises(OpSyntaxError):
        parse_op_line(bad)


def test_parse_plan_rationale_and_ops():
    plan = parse_plan('# link the two topics\nAddEdge("A", "B", "relates to")\n')
    assert plan.rationale == "link the two topics"
    assert len(plan.ops) == 1


# ----------------------------------------------------------------- resolution

def test_resolve_node_id_title_anchor():
    g = KnowledgeGraph()
    a = g.add_node("Greenhouse Gas Emissions", "ghg")
    assert resolve_node(g, a) == a
    assert resolve_node(g, "greenhouse gas emissions") == a
    assert resolve_node(g, "emissions") == a
    with pytest.raises(UnknownNode):
        resolve_node(g, "volcano")


def test_resolve_ambiguous_uses_anchor_top_hit():
    g = KnowledgeGraph()
    a = g.add_node("Climate Change Impacts")
    b = g.add_node("Climate Change Causes")
    assert resolve_node(g, "climate change") == min(a, b)


def test_apply_op_tags_user_origin():
    g = KnowledgeGraph()
    apply_op(g, parse_op_line('AddNode("My Insight", "from a video", "", "")'))
    node = next(iter(g.nodes.values()))
    assert node.origin == ORIGIN_USER


def test_apply_op_position_patch():
    g = KnowledgeGraph()
    g.add_node("A")
    apply_op(g, parse_op_line('UpdateNode("A", "position", "120,40.5")'))
    assert next(iter(g.nodes.values())).position == (120.0, 40.5)
    with pytest.raises(OpSyntaxError):
        apply_op(g, parse_op_line('UpdateNode("A", "position", "oops")'))


# ------------------------------------------------------------------ planning

def plan_provider(plan_text):
    p = ScriptedProvider()
    p.add("plan_ops", "User request:", plan_text)
    return p


def test_plan_section_scenario():
    g = KnowledgeGraph()
    g.add_node("Greenhouse Gas Emissions", "ghg")
    provider = plan_provider(
        'AddNode("Financial Investment Relevance", "emissions matter to investors", '
        '"Greenhouse Gas Emissions", "is important for")'
    )
    mm = MapManager(provider)
    plan = mm.plan("Greenhouse gas emissions are becoming important for financial "
                   "investment decisions", g, [])
    assert len(plan.ops) == 1
    assert plan.ops[0].kind == "AddNode"


def test_plan_single_delete():
    g = KnowledgeGraph()
    g.add_node("X")
    mm = MapManager(plan_provider('DeleteNode("X", "detach")'))
    plan = mm.plan("delete node X", g, [])
    assert plan.ops == [GraphOp("DeleteNode", ["X", "detach"])]


def test_plan_invalid_then_reask_then_failure():
    p = ScriptedProvider()
    p.add("plan_ops", "User request:", "gibberish not an op")
    mm = MapManager(p)
    with pytest.raises(PlanningFailure):
        mm.plan("do something", KnowledgeGraph(), [])
    # both the original ask and the re-ask hit the provider
    assert len([r for r in p.requests if r.template_id == "plan_ops"]) == 2


def test_plan_empty_is_failure():
    mm = MapManager(plan_provider("# nothing to do"))
    with pytest.raises(PlanningFailure):
        mm.plan("noop", KnowledgeGraph(), [])


def test_reparent_golden_plan():
    # move a node up a level: delete the old edge, add the new one
    g = KnowledgeGraph()
    root = g.add_node("Climate Change")
    ghg = g.add_node("Greenhouse Gas Emissions", parent=root, label="includes")
    fin = g.add_node("Financial Investment Relevance", parent=ghg, label="is important for")
    golden = [
        GraphOp("DeleteEdge", ["Greenhouse Gas Emissions", "Financial Investment Relevance"]),
        GraphOp("AddEdge", ["Climate Change", "Financial Investment Relevance", "includes"]),
    ]
    provider = plan_provider(
        'DeleteEdge("Greenhouse Gas Emissions", "Financial Investment Relevance")\n'
        'AddEdge("Climate Change", "Financial Investment Relevance", "includes")'
    )
    mm = MapManager(provider)
    plan = mm.plan("move this node to be at the same level as Greenhouse Gas Emissions", g, [])
    assert plan.ops == golden
    outcome = mm.execute_with_self_correction(plan, g, [])
    assert outcome.completed
    assert g.parents_of(fin) == [root]


# ----------------------------------------------------------------- execution

def test_self_correction_retry_succeeds_second_attempt():
    g = KnowledgeGraph()
    ghg = g.add_node("Greenhouse Gas Emissions")
    provider = ScriptedProvider()
    # first op references a missing anchor; the correction fixes the reference
    provider.add("self_correct", "no node matches",
                 'AddEdge("Greenhouse Gas Emissions", "Financial Investment Relevance", "influences")')
    mm = MapManager(provider)
    g.add_node("Financial Investment Relevance")
    plan = parse_plan(
        'AddEdge("Carbon Budget", "Financial Investment Relevance", "is important for")'
    )
    outcome = mm.execute_with_self_correction(plan, g, [])
    assert outcome.completed
    assert outcome.results[0].status == "corrected"
    assert outcome.results[0].attempts == 2
    assert any(e.label == "influences" for e in g.edges.values())


def test_never_correcting_provider_hits_bounds():
    g = KnowledgeGraph()
    g.add_node("A")
    provider = ScriptedProvider()
    provider.add("self_correct", "Failed operation",
                 'AddEdge("Missing One", "Missing Two", "x")')
    provider.add("plan_ops", "User request:",
                 'AddEdge("Missing One", "Missing Two", "x")')
    mm = MapManager(provider, MapManagerConfig(max_attempts=5, max_depth=3))
    before = g.serialize()
    plan = parse_plan('AddEdge("Missing One", "Missing Two", "x")')
    outcome = mm.execute_with_self_correction(plan, g, [], user_input="link them")
    assert outcome.message == TERMINAL_MESSAGE
    assert outcome.completed is False
    assert outcome.depth_used == 3
    # op-log counting oracle: exactly 5 attempts per cycle, 3 cycles, all failures
    assert len(mm.op_log) == 15
    for cycle in (1, 2, 3):
        assert sum(1 for rec in mm.op_log if rec["cycle"] == cycle) == 5
    assert all(not rec["ok"] for rec in mm.op_log)
    assert g.serialize() == before


def test_happy_path_no_corrections():
    g = KnowledgeGraph()
    mm = MapManager(ScriptedProvider())
    plan = parse_plan(
        'AddNode("Energy", "energy systems", "", "")\n'
        'AddNode("Solar", "solar power", "Energy", "includes")'
    )
    outcome = mm.execute_with_self_correction(plan, g, [])
    assert outcome.completed and outcome.depth_used == 1
    assert [r.status for r in outcome.results] == ["succeeded", "succeeded"]
    assert len(g.nodes) == 2 and len(g.edges) == 1


def test_atomic_prefix_consistency():
    # failed op leaves the graph at snapshot + succeeded prefix only
    g = KnowledgeGraph()
    provider = ScriptedProvider()
    provider.add("self_correct", "Failed operation", 'AddEdge("Nope", "Nada", "x")')
    provider.add("plan_ops", "User request:", 'AddEdge("Nope", "Nada", "x")')
    mm = MapManager(provider, MapManagerConfig(max_attempts=2, max_depth=2))
    plan = parse_plan(
        'AddNode("Kept", "survives", "", "")\n'
        'AddEdge("Nope", "Nada", "x")\n'
        'AddNode("Never", "unreached", "", "")'
    )
    outcome = mm.execute_with_self_correction(plan, g, [], user_input="x")
    assert outcome.completed is False
    titles = {n.title for n in g.nodes.values()}
    assert "Kept" in titles and "Never" not in titles


def test_handle_contribution_end_to_end():
    g = KnowledgeGraph()
    g.add_node("Greenhouse Gas Emissions", "heat-trapping gases")
    provider = ScriptedProvider()
    provider.add(
        "plan_ops", "User request:",
        'AddNode("Financial Investment Relevance", "emissions influence investing", '
        '"Greenhouse Gas Emissions", "is important for")',
    )
    mm = MapManager(provider)
    outcome = mm.handle_contribution(
        "Greenhouse gas emissions are becoming important for financial investment decisions",
        g, [],
    )
    assert outcome.completed
    new = [n for n in g.nodes.values() if n.title == "Financial Investment Relevance"]
    assert len(new) == 1
    assert new[0].origin == ORIGIN_USER
    edge = next(e for e in g.edges.values() if e.child == new[0].id)
    assert edge.label == "is important for"
    assert "AddNode" in outcome.message


def test_handle_contribution_empty_plan_error():
    g = KnowledgeGraph()
    g.add_node("A")
    before = g.revision
    provider = ScriptedProvider()
    provider.add("plan_ops", "User request:", "")
    mm = MapManager(provider)
    with pytest.raises(PlanningFailure):
        mm.handle_contribution("do nothing", g, [])
    assert g.revision == before
