import numpy as np
import pytest

from cograph.errors import EmptyTree, SummaryFailure
from cograph.ingest import Chunk, cosine
from cograph.provider import CompletionRequest, ScriptedProvider, hash_embed
from cograph.raptor import ClusterConfig, build_tree, retrieve


def summarizing_fallback(request: CompletionRequest) -> str:
    # deterministic stand-in summary: first 25 words of the member passages
    assert request.template_id == "summarize"
    body = request.prompt.split("\n\n", 1)[1]
    return " ".join(body.split()[:25])


@pytest.fixture
def provider():
    return ScriptedProvider(fallback=summarizing_fallback)


def make_chunk(i, text):
    return Chunk(id=f"c{i:03d}", doc_id="d1", start=0, end=len(text), text=text,
                 page=1, embedding=hash_embed(text))


def two_cluster_fixture():
    """Two well-separated topics, 5 chunks each, deterministic embeddings."""
    ocean = [f"ocean tide wave coral reef sample {i}" for i in range(5)]
    market = [f"market stock bond trade price sample {i}" for i in range(5)]
    return [make_chunk(i, t) for i, t in enumerate(ocean + market)]


def corpus_50():
    topics = ["ocean coral", "market bond", "forest timber", "engine piston", "poem verse"]
    texts = [f"{topics[i % 5]} subject matter item {i} with words {i * 7}" for i in range(50)]
    return [make_chunk(i, t) for i, t in enumerate(texts)]


def test_single_chunk_tree(provider):
    tree = build_tree([make_chunk(0, "only one chunk here.")], provider)
    assert tree.max_level == 0
    assert len(tree.nodes) == 1
    assert len(tree.roots) == 1


def test_two_cluster_fixture_level1(provider):
    chunks = two_cluster_fixture()
    tree = build_tree(chunks, provider, ClusterConfig(seed=0))
    level1 = [n for n in tree.nodes.values() if n.level == 1]
    assert len(level1) == 2
    # k-means oracle with k=2 over the same embeddings
    from sklearn.cluster import KMeans

    matrix = np.stack([c.embedding for c in chunks])
    labels = KMeans(n_clusters=2, n_init=10, random_state=0).fit_predict(matrix)
    oracle_groups = {
        frozenset(chunks[i].id for i in range(10) if labels[i] == lab) for lab in (0, 1)
    }
    built_groups = {
        frozenset(tree.nodes[m].chunk_id for m in n.children) for n in level1
    }
    assert built_groups == oracle_groups
    for n in level1:
        assert len(n.children) == 5


def test_50_chunk_corpus_properties(provider):
    chunks = corpus_50()
    tree = build_tree(chunks, provider)
    assert tree.max_level >= 2
    # reachability oracle: every leaf reachable from some root, no duplicates
    reached = []
    for root in tree.roots:
        reached.extend(tree.leaf_descendants(root))
    assert sorted(reached) == sorted(c.id for c in chunks)
    assert len(reached) == len(set(reached))
    # level monotonicity
    for node in tree.nodes.values():
        for child in node.children:
            assert tree.nodes[child].level < node.level


def test_build_deterministic(provider):
    chunks = corpus_50()
    import json

    t1 = json.dumps(build_tree(chunks, provider).to_dict(), sort_keys=True)
    t2 = json.dumps(build_tree(chunks, ScriptedProvider(fallback=summarizing_fallback)).to_dict(),
                    sort_keys=True)
    assert t1 == t2


def test_summary_failure_aborts():
    provider = ScriptedProvider(fallback=lambda r: "")
    with pytest.raises(SummaryFailure):
        build_tree(two_cluster_fixture(), provider)


def test_build_empty_rejected(provider):
    with pytest.raises(EmptyTree):
        build_tree([], provider)


def test_retrieve_detailed_single_leaf(provider):
    tree = build_tree([make_chunk(0, "the only chunk.")], provider)
    (hit,) = retrieve(tree, hash_embed("anything"), "detailed", k=3)
    assert hit[0].level == 0


def test_retrieve_broad_hits_cluster_summary(provider):
    chunks = two_cluster_fixture()
    tree = build_tree(chunks, provider, ClusterConfig(seed=0))
    query = hash_embed("ocean tide wave coral reef")
    hits = retrieve(tree, query, "broad", k=3)
    assert all(h[0].level >= 1 for h in hits)
    # cosine scan oracle over the summary level
    summaries = [n for n in tree.nodes.values() if n.level >= 1]
    best = max(summaries, key=lambda n: cosine(query, n.embedding))
    assert hits[0][0].id == best.id
    assert "ocean" in hits[0][0].text


def test_granularity_level_contracts(provider):
    tree = build_tree(corpus_50(), provider)
    floor = -(-tree.max_level // 2)
    q = hash_embed("market bond subject")
    assert all(h[0].level == 0 for h in retrieve(tree, q, "detailed", k=8))
    assert all(h[0].level >= floor for h in retrieve(tree, q, "broad", k=8))


def test_collapsed_equals_brute_force(provider):
    tree = build_tree(corpus_50(), provider)
    rng = np.random.default_rng(1)
    for _ in range(30):
        q = rng.normal(size=64)
        got = [(h[0].id, h[1]) for h in retrieve(tree, q, "collapsed", k=10)]
        expected = sorted(
            ((n.id, cosine(q, n.embedding)) for n in tree.nodes.values()),
            key=lambda x: (-x[1], x[0]),
        )[:10]
        assert [g[0] for g in got] == [e[0] for e in expected]


def test_retrieve_empty_tree():
    from cograph.raptor import ChunkTree

    with pytest.raises(EmptyTree):
        retrieve(ChunkTree(), hash_embed("q"), "collapsed", 3)


def test_tree_round_trip(provider):
    import json

    tree = build_tree(two_cluster_fixture(), provider)
    doc = tree.to_dict()
    from cograph.raptor import ChunkTree

    again = ChunkTree.from_dict(doc)
    assert json.dumps(again.to_dict(), sort_keys=True) == json.dumps(doc, sort_keys=True)
