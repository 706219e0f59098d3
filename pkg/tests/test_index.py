import random

import pytest

from ucfcore import (
    UcfIndex,
    UncertainGraph,
    build_eta_tree,
    build_ucf_index,
    decompose,
    deserialize,
    direct_core,
    kprob_value,
    serialize,
)
from ucfcore.index import IndexFormatError

from conftest import small_random_graph


def build_index(g, algo="opstar"):
    index, _ = build_ucf_index(g, algo=algo)
    return index


def test_path_fixture_tree_shape(path3):
    res = decompose(path3, "bc")[1]
    tree = build_eta_tree(1, [v for v, _ in res.stack], res.thresholds, path3)
    root_id = tree.roots()
    assert len(root_id) == 1
    root = tree.nodes[root_id[0]]
    assert sorted(root.vertices) == [2]
    assert abs(root.threshold - 0.8) < 1e-15
    assert len(root.children) == 1
    child = tree.nodes[root.children[0]]
    assert sorted(child.vertices) == [0, 1]
    assert abs(child.threshold - 0.9) < 1e-15


def test_single_vertex_stack():
    g = UncertainGraph.from_edges([], n=1)
    tree = build_eta_tree(1, [0], {0: 0.4}, g)
    assert len(tree.nodes) == 1
    assert tree.nodes[0].parent is None


def test_two_disconnected_triangles_make_two_roots():
    edges = [(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5),
             (3, 4, 0.7), (4, 5, 0.7), (3, 5, 0.7)]
    g = UncertainGraph.from_edges(edges)
    index = build_index(g)
    assert len(index.trees[2].roots()) == 2


def test_stack_threshold_mismatch_rejected(path3):
    with pytest.raises(ValueError):
        build_eta_tree(1, [0, 1], {0: 0.5}, path3)


def test_tree_invariants_on_random_graphs():
    rng = random.Random(64)
    for _ in range(20):
        g = small_random_graph(rng, max_n=40, max_m=90)
        results = decompose(g, "opstar")
        for k, res in results.items():
            tree = build_eta_tree(k, [v for v, _ in res.stack], res.thresholds, g)
            all_vertices = []
            for n in tree.nodes:
                assert n.vertices
                if n.parent is not None:
                    assert tree.nodes[n.parent].threshold < n.threshold
                for v in n.vertices:
                    assert res.thresholds[v] == n.threshold
                all_vertices.extend(n.vertices)
            assert sorted(all_vertices) == sorted(res.thresholds)


def test_query_examples(path3):
    index = build_index(path3)
    assert [sorted(c) for c in index.query(1, 0.85).components] == [[0, 1]]
    assert [sorted(c) for c in index.query(1, 0.8).components] == [[0, 1, 2]]
    assert [sorted(c) for c in index.query(1, 0.0).components] == [[0, 1, 2]]
    assert index.query(5, 0.5).components == []


def test_query_includes_exact_threshold(path3):
    index = build_index(path3)
    t = index.trees[1].threshold_of(0)
    comps = index.query(1, t).components
    assert any(0 in c for c in comps)


def test_query_union_matches_threshold_filter():
    rng = random.Random(110)
    for _ in range(15):
        g = small_random_graph(rng, max_n=35, max_m=80)
        results = decompose(g, "opstar")
        index = build_index(g)
        for k, res in results.items():
            for eta in (0.0, 0.3, 0.7, 1.0):
                got = index.query(k, eta)
                union = set().union(*got.components) if got.components else set()
                want = {v for v, t in res.thresholds.items() if t >= eta}
                assert union == want


def test_query_components_satisfy_core_definition():
    rng = random.Random(120)
    for _ in range(10):
        g = small_random_graph(rng, max_n=30, max_m=60)
        index = build_index(g)
        for k in list(index.trees):
            thresholds = sorted(
                {n.threshold for n in index.trees[k].nodes}
            )
            for eta in thresholds:
                res = index.query(k, eta)
                for comp in res.components:
                    for v in comp:
                        probs = [p for w, p in g.adj[v] if w in comp]
                        assert kprob_value(probs, k) >= eta
                ref = direct_core(g, k, eta)
                assert {frozenset(c) for c in res.components} == {
                    frozenset(c) for c in ref.components
                }


def test_nesting_across_eta_and_k():
    rng = random.Random(130)
    for _ in range(10):
        g = small_random_graph(rng, max_n=35, max_m=90)
        index = build_index(g)
        km = max(index.trees, default=0)
        etas = [0.0, 0.2, 0.5, 0.8, 1.0]
        for k in range(1, km + 1):
            for e1, e2 in zip(etas, etas[1:]):
                outer = index.query(k, e1).components
                for comp in index.query(k, e2).components:
                    assert any(comp <= big for big in outer)
        for k in range(1, km):
            for eta in etas:
                outer = index.query(k, eta)
                inner = index.query(k + 1, eta)
                out_union = set().union(*outer.components) if outer.components else set()
                in_union = set().union(*inner.components) if inner.components else set()
                assert in_union <= out_union


def test_serialize_roundtrip_byte_identical():
    rng = random.Random(140)
    for _ in range(10):
        g = small_random_graph(rng, max_n=30, max_m=60)
        index = build_index(g)
        text = serialize(index)
        again = serialize(deserialize(text))
        assert text == again


def test_serialized_queries_match_original():
    rng = random.Random(150)
    g = small_random_graph(rng, max_n=30, max_m=70)
    index = build_index(g)
    loaded = deserialize(serialize(index))
    for k in list(index.trees):
        for eta in (0.0, 0.4, 0.9):
            a = {frozenset(c) for c in index.query(k, eta).components}
            b = {frozenset(c) for c in loaded.query(k, eta).components}
            assert a == b


def test_empty_index_is_header_only():
    g = UncertainGraph.from_edges([], n=3)
    index = build_index(g)
    text = serialize(index)
    lines = text.splitlines()
    assert lines[0] == "UCF 1"
    assert lines[1] == "kmax 0"
    assert lines[2].startswith("fingerprint ")
    assert len(lines) == 3


def test_deserialize_version_mismatch():
    with pytest.raises(IndexFormatError, match="version"):
        deserialize("UCF 2\nkmax 0\nfingerprint ab\n")


def test_deserialize_corrupt_node_reports_line():
    g = UncertainGraph.from_edges([(0, 1, 0.5)])
    text = serialize(build_index(g))
    lines = text.splitlines()
    node_at = next(i for i, l in enumerate(lines) if l.startswith("node"))
    lines[node_at] = "node zero parent - thres x verts 0"
    with pytest.raises(IndexFormatError, match=f"line {node_at + 1}"):
        deserialize("\n".join(lines) + "\n")


def test_deserialize_rejects_unknown_records():
    with pytest.raises(IndexFormatError):
        deserialize("UCF 1\nkmax 1\nfingerprint ab\nwhat 1 2 3\n")


def test_ec_index_carries_algo_flag():
    g = UncertainGraph.from_edges([(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5)])
    index, _ = build_ucf_index(g, algo="ec")
    text = serialize(index)
    assert "algo ec" in text.splitlines()
    assert deserialize(text).algo == "ec"
    assert serialize(deserialize(text)) == text


def test_index_query_validates_arguments(path3):
    index = build_index(path3)
    with pytest.raises(ValueError):
        index.query(0, 0.5)
    with pytest.raises(ValueError):
        index.query(1, 1.5)


def test_original_labels_flow_through_index():
    from ucfcore import parse_edge_list

    g = parse_edge_list("5 6 0.9\n6 7 0.8")
    index = build_index(g)
    comps = index.query(1, 0.85).components
    assert [sorted(c) for c in comps] == [[5, 6]]
