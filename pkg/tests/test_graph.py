import random

import pytest

from cograph.errors import (
    DuplicateEdge,
    EmptyPatch,
    EmptyTitle,
    MalformedDocument,
    UnknownNode,
    UnknownParent,
    WouldCreateCycle,
)
from cograph.graph import ORIGIN_USER, KnowledgeGraph, LayoutConfig


def scenario_graph():
    """Small climate graph used across tests."""
    g = KnowledgeGraph()
    ghg = g.add_node("Greenhouse Gas Emissions", "emissions of heat-trapping gases")
    causes = g.add_node("Causes of Climate Change", "drivers of warming")
    bio = g.add_node("Biodiversity Loss", "species decline")
    defo = g.add_node("Deforestation", "forest clearing", parent=causes, label="contributes to")
    g.add_edge(bio, defo, "leads to")
    return g, {"ghg": ghg, "causes": causes, "bio": bio, "defo": defo}


def test_add_node_under_parent_creates_edge():
    g, ids = scenario_graph()
    new = g.add_node(
        "Financial Investment Relevance", "emissions matter to investors",
        origin=ORIGIN_USER, parent=ids["ghg"], label="is important for",
    )
    edges = [e for e in g.edges.values() if e.child == new]
    assert len(edges) == 1
    assert edges[0].parent == ids["ghg"]
    assert edges[0].label == "is important for"


def test_add_node_empty_graph_is_single_root():
    g = KnowledgeGraph()
    nid = g.add_node("Root")
    assert list(g.nodes) == [nid]
    assert not g.edges
    assert g.roots() == [nid]


def test_revision_advances_per_mutation():
    # op-log replay: an independent counter over logged mutations matches revision
    g = KnowledgeGraph()
    for i in range(3):
        g.add_node(f"N{i}")
    assert len(g.nodes) == 3
    assert g.revision == 3
    assert [rec["revision"] for rec in g.op_log] == [1, 2, 3]


def test_add_node_errors():
    g = KnowledgeGraph()
    with pytest.raises(EmptyTitle):
        g.add_node("   ")
    with pytest.raises(UnknownParent):
        g.add_node("X", parent="nope")


def test_multi_parent_child():
    g, ids = scenario_graph()
    assert g.parents_of(ids["defo"]) == sorted([ids["causes"], ids["bio"]])


def test_two_cycle_rejected():
    g = KnowledgeGraph()
    a, b = g.add_node("A"), g.add_node("B")
    g.add_edge(a, b, "x")
    with pytest.raises(WouldCreateCycle):
        g.add_edge(b, a, "y")
    with pytest.raises(DuplicateEdge):
        g.add_edge(a, b, "z")
    with pytest.raises(UnknownNode):
        g.add_edge(a, "nope", "z")


def brute_force_has_cycle(nodes, edge_pairs):
    # DFS cycle oracle, independent of the graph class
    adj = {n: [] for n in nodes}
    for p, c in edge_pairs:
        adj[p].append(c)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}

    def dfs(u):
        color[u] = GRAY
        for v in adj[u]:
            if color[v] == GRAY:
                return True
            if color[v] == WHITE and dfs(v):
                return True
        color[u] = BLACK
        return False

    return any(color[n] == WHITE and dfs(n) for n in nodes)


def test_random_dag_stays_acyclic():
    rng = random.Random(42)
    g = KnowledgeGraph()
    ids = [g.add_node(f"N{i}") for i in range(20)]
    for _ in range(120):
        p, c = rng.choice(ids), rng.choice(ids)
        try:
            g.add_edge(p, c, "r")
        except (WouldCreateCycle, DuplicateEdge):
            pass
        pairs = [(e.parent, e.child) for e in g.edges.values()]
        assert not brute_force_has_cycle(list(g.nodes), pairs)
    assert not g.has_cycle()


def reachable_from_roots(nodes, edge_pairs, roots):
    adj = {n: [] for n in nodes}
    for p, c in edge_pairs:
        adj[p].append(c)
    seen = set(roots)
    stack = list(roots)
    while stack:
        cur = stack.pop()
        for v in adj[cur]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def test_delete_leaf_either_policy():
    for policy in ("detach", "cascade"):
        g, ids = scenario_graph()
        removed = g.delete_node(ids["defo"], orphan_policy=policy)
        assert removed == [ids["defo"]]
        assert all(ids["defo"] not in (e.parent, e.child) for e in g.edges.values())


def test_delete_cascade_removes_sole_parented_child():
    g = KnowledgeGraph()
    a = g.add_node("A")
    b = g.add_node("B", parent=a, label="has")
    c = g.add_node("C", parent=b, label="has")
    removed = g.delete_node(b, orphan_policy="cascade")
    assert set(removed) == {b, c}
    assert set(g.nodes) == {a}


def test_delete_detach_keeps_child():
    g = KnowledgeGraph()
    a = g.add_node("A")
    b = g.add_node("B", parent=a, label="has")
    c = g.add_node("C", parent=b, label="has")
    removed = g.delete_node(b, orphan_policy="detach")
    assert removed == [b]
    assert c in g.nodes and g.parents_of(c) == []


def test_delete_cascade_spares_multi_parented_descendants():
    g, ids = scenario_graph()
    removed = g.delete_node(ids["causes"], orphan_policy="cascade")
    # Deforestation still reachable via Biodiversity Loss
    assert removed == [ids["causes"]]
    assert ids["defo"] in g.nodes
    # oracle check: remaining graph equals reachability sweep from live roots
    pairs = [(e.parent, e.child) for e in g.edges.values()]
    assert set(g.nodes) == reachable_from_roots(list(g.nodes), pairs, g.roots())


def test_update_node_star_only_changes_star():
    g, ids = scenario_graph()
    before = g.nodes[ids["ghg"]]
    snapshot = (before.title, before.detail, before.origin, before.position, before.group)
    g.update_node(ids["ghg"], {"starred": True})
    after = g.nodes[ids["ghg"]]
    assert after.starred is True
    assert (after.title, after.detail, after.origin, after.position, after.group) == snapshot


def test_update_title_survives_round_trip():
    g, ids = scenario_graph()
    g.update_node(ids["ghg"], {"title": "GHG Emissions"})
    g2 = KnowledgeGraph.deserialize(g.serialize())
    assert g2.nodes[ids["ghg"]].title == "GHG Emissions"


def test_origin_not_patchable():
    g, ids = scenario_graph()
    with pytest.raises(EmptyPatch):
        g.update_node(ids["ghg"], {"origin": ORIGIN_USER})
    with pytest.raises(EmptyPatch):
        g.update_node(ids["ghg"], {})


def brute_force_anchor(graph, phrase):
    from cograph.graph import tokenize

    q = set(tokenize(phrase))
    rows = []
    for nid in sorted(graph.nodes):
        n = graph.nodes[nid]
        t = len(q & set(tokenize(n.title))) / len(q)
        d = len(q & set(tokenize(n.detail))) / len(q)
        if t or d:
            rows.append((nid, t, d))
    rows.sort(key=lambda r: (-r[1], -r[2], r[0]))
    return [r[0] for r in rows]


def test_find_anchor_exact_title_top():
    g, ids = scenario_graph()
    hits = g.find_anchor("greenhouse gas emissions")
    assert hits[0][0] == ids["ghg"]


def test_find_anchor_no_overlap_empty():
    g, _ = scenario_graph()
    assert g.find_anchor("zebra quantum") == []


def test_find_anchor_identical_titles_ordered_by_id():
    g = KnowledgeGraph()
    a = g.add_node("Climate Change")
    b = g.add_node("Climate Change")
    hits = g.find_anchor("climate change")
    assert [h[0] for h in hits] == sorted([a, b])
    assert [h[0] for h in hits] == brute_force_anchor(g, "climate change")


def test_layout_single_root_origin():
    g = KnowledgeGraph()
    g.add_node("Root")
    assert list(g.layout().values()) == [(0.0, 0.0)]


def test_layout_chain_spacing():
    g = KnowledgeGraph()
    a = g.add_node("A")
    b = g.add_node("B", parent=a, label="x")
    c = g.add_node("C", parent=b, label="x")
    s = 100.0
    pos = g.layout(LayoutConfig(column_spacing=s, row_spacing=50.0))
    assert pos[a][0] == 0 and pos[b][0] == s and pos[c][0] == 2 * s


def bfs_depths(nodes, edge_pairs):
    parents = {n: [] for n in nodes}
    for p, c in edge_pairs:
        parents[c].append(p)
    depth = {}

    def d(n):
        if n in depth:
            return depth[n]
        depth[n] = 0 if not parents[n] else max(d(p) for p in parents[n]) + 1
        return depth[n]

    for n in nodes:
        d(n)
    return depth


def test_layout_diamond_depth():
    g = KnowledgeGraph()
    a = g.add_node("A")
    b = g.add_node("B", parent=a, label="x")
    c = g.add_node("C", parent=a, label="x")
    d_ = g.add_node("D", parent=b, label="x")
    g.add_edge(c, d_, "x")
    depths = g.depths()
    oracle = bfs_depths(list(g.nodes), [(e.parent, e.child) for e in g.edges.values()])
    assert depths == oracle
    assert depths[d_] == 2


def test_layout_deterministic_and_no_overlap():
    g, _ = scenario_graph()
    p1, p2 = g.layout(full=True), g.layout(full=True)
    assert p1 == p2
    assert len(set(p1.values())) == len(p1)


def test_layout_preserves_manual_position():
    g, ids = scenario_graph()
    g.update_node(ids["ghg"], {"position": (999.0, 999.0)})
    assert g.layout()[ids["ghg"]] == (999.0, 999.0)
    assert g.layout(full=True)[ids["ghg"]] != (999.0, 999.0)


def test_serialize_round_trips():
    g = KnowledgeGraph()
    assert KnowledgeGraph.deserialize(g.serialize()).serialize() == g.serialize()
    g2, _ = scenario_graph()
    text = g2.serialize()
    assert KnowledgeGraph.deserialize(text).serialize() == text


def test_serialize_random_graph_round_trip():
    rng = random.Random(7)
    g = KnowledgeGraph()
    ids = [g.add_node(f"Node {i}", detail=f"detail {i}") for i in range(50)]
    for _ in range(80):
        try:
            g.add_edge(rng.choice(ids), rng.choice(ids), "rel")
        except Exception:
            pass
    g.update_node(ids[0], {"starred": True, "position": (1.5, -2.0)})
    text = g.serialize()
    g2 = KnowledgeGraph.deserialize(text)
    assert g2.serialize() == text
    assert g2.revision == g.revision


def test_truncated_document_rejected():
    g, _ = scenario_graph()
    with pytest.raises(MalformedDocument):
        KnowledgeGraph.deserialize(g.serialize()[:40])
    with pytest.raises(MalformedDocument):
        KnowledgeGraph.deserialize('{"format": "other"}')


def test_adjacency_matrix_view():
    g = KnowledgeGraph()
    a = g.add_node("A")
    b = g.add_node("B", parent=a, label="x")
    ids, mat = g.adjacency_matrix()
    assert mat[ids.index(a)][ids.index(b)] == 1
    assert mat[ids.index(b)][ids.index(a)] == 0


def test_groups_membership():
    g, ids = scenario_graph()
    gid = g.group_nodes([ids["ghg"], ids["causes"]])
    assert g.nodes[ids["ghg"]].group == gid
    g.ungroup(gid)
    assert g.nodes[ids["ghg"]].group is None
