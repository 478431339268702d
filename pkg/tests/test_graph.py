from collections import Counter

import numpy as np
import pytest

from graphene import (NEITHER, Collection, Context, EdgeKind, EdgePartitioner, UDFError,
                      build_graph, from_edge_list, reads)
from conftest import make_graph
from oracles import mr_triplets_join, random_graph


def triplet_multiset(g):
    return Counter((s, d, sa, a, da) for (s, d), (sa, a, da) in g.triplets.collect())


def oracle_triplets(vdict, edges):
    return Counter((s, d, vdict[s], a, vdict[d]) for s, d, a in edges if s in vdict and d in vdict)


def test_graph_defaults_for_edge_only_vertices(ctx):
    verts = Collection.from_iterable([(1, "a")], ctx=ctx)
    edges = Collection.from_iterable([((1, 2), 0.5)], ctx=ctx)
    g = build_graph(verts, edges, default_v="?", ctx=ctx)
    assert g.vertices.to_dict() == {1: "a", 2: "?"}
    assert g.edges.collect() == [((1, 2), 0.5)]


def test_graph_merges_duplicate_vertices(ctx1):
    verts = Collection.from_iterable([(1, 2), (1, 5), (3, 1)], ctx=ctx1)
    g = build_graph(verts, Collection.from_iterable([], ctx=ctx1), merge_v=lambda a, b: a + b, ctx=ctx1)
    assert g.vertices.to_dict() == {1: 7, 3: 1}
    assert g.edges.count() == 0


def test_negative_ids_rejected(ctx1):
    with pytest.raises(ValueError):
        from_edge_list([(-1, 2)], ctx=ctx1)


@pytest.mark.parametrize("kind", ["input", "random1d", "srchash1d", "hash2d"])
def test_triplets_equal_nested_loop_join(kind):
    ids, edges = random_graph(11, 120, 1000, attr=lambda r: r.randrange(100))
    attrs = {v: f"v{v}" for v in ids}
    with Context(workers=2, partitioner=kind) as ctx:
        g = make_graph(ctx, ids, edges, attrs)
        assert triplet_multiset(g) == oracle_triplets(attrs, edges)
        assert Counter(g.edges.collect()) == Counter(((s, d), a) for s, d, a in edges)
        assert g.vertices.to_dict() == attrs


def test_masked_vertex_hides_its_edges(ctx):
    edges = [(1, 6, 0), (6, 2, 0), (1, 2, 0)]
    g = make_graph(ctx, [1, 2, 6], edges).mask_vertices([1, 2])
    assert g.vertices.to_dict() == {1: 0, 2: 0}
    assert [k for k, _ in g.triplets.collect()] == [(1, 2)]
    assert g.edges.collect() == [((1, 2), 0)]


def test_mr_triplets_matches_join_oracle(ctx):
    ids, edges = random_graph(12, 60, 400, attr=lambda r: r.randrange(7))
    attrs = {v: v % 5 for v in ids}
    g = make_graph(ctx, ids, edges, attrs)

    def send(t):
        return (t.dst_attr + t.attr, t.src_attr * t.attr)

    got = g.mr_triplets(send, lambda a, b: a + b)
    want = mr_triplets_join(list(attrs.items()), edges, send, lambda a, b: a + b)
    assert Counter(got.collect()) == want
    assert got.shares_index(g.vparts)


def test_mr_triplets_none_messages_and_empty_result(ctx1):
    g = make_graph(ctx1, [1, 2, 3], [(1, 2, 1.0), (2, 3, 1.0)])
    assert g.mr_triplets(lambda t: None, min).collect() == []
    got = g.mr_triplets(lambda t: (None, t.src_id), min).to_dict()
    assert got == {2: 1, 3: 2}


def test_map_v_keeps_index(ctx):
    g = make_graph(ctx, range(10), [(i, (i + 1) % 10, 1.0) for i in range(10)])
    h = g.map_v(lambda v, a: v * 2)
    assert h.vertices.to_dict() == {v: 2 * v for v in range(10)}
    assert h.epoch == g.epoch
    assert all(a.index is b.index for a, b in zip(g.vparts, h.vparts))
    assert h.eparts is g.eparts


def test_map_e_edge_only_ships_nothing(ctx1):
    g = make_graph(ctx1, range(20), [(i, (i * 7) % 20, float(i)) for i in range(20)])
    ctx1.meter.reset()
    h = g.map_e(lambda t: t.attr * 2, access=NEITHER)
    assert ctx1.meter.total_bytes("view.ship") == 0
    assert sorted(a for _, a in h.edges.collect()) == sorted(2.0 * i for i in range(20))
    assert h.epoch == g.epoch


def test_map_e_reads_endpoints(ctx):
    g = make_graph(ctx, range(5), [(0, 1, 0), (1, 2, 0), (4, 3, 0)], {v: v * 10 for v in range(5)})
    h = g.map_e(lambda t: t.src_attr + t.dst_attr)
    assert sorted(h.edges.collect()) == [((0, 1), 10), ((1, 2), 30), ((4, 3), 70)]


def test_udf_errors_carry_key(ctx1):
    g = make_graph(ctx1, [1, 2], [(1, 2, 0)])
    with pytest.raises(UDFError) as info:
        g.map_v(lambda v, a: 1 / (v - 2))
    assert info.value.key == 2
    with pytest.raises(UDFError) as info:
        g.mr_triplets(lambda t: (1 / t.attr, None), min)
    assert info.value.key == (1, 2)


def test_left_join_v_pairs_with_none(ctx):
    g = make_graph(ctx, [1, 2, 3], [(1, 2, 0)], {1: "a", 2: "b", 3: "c"})
    t = Collection.from_iterable([(1, 10), (3, 30), (99, 0)], ctx=ctx)
    h = g.left_join_v(t)
    assert h.vertices.to_dict() == {1: ("a", 10), 2: ("b", None), 3: ("c", 30)}
    assert h.epoch == g.epoch


def test_left_join_v_duplicates_deterministic(ctx1):
    g = make_graph(ctx1, [1], [])
    t = Collection.from_iterable([(1, "zz"), (1, "b"), (1, "q")], 3, ctx1)
    assert g.left_join_v(t).vertices.to_dict() == {1: (0, "b")}
    t2 = Collection.from_iterable([(1, "q"), (1, "b"), (1, "zz")], 2, ctx1)
    assert g.left_join_v(t2).vertices.to_dict() == {1: (0, "b")}
    merged = g.left_join_v(t, merge=lambda a, b: a + b).vertices.to_dict()[1][1]
    assert sorted(merged) == sorted("zzbq")


def test_join_with_own_vertices_needs_no_exchange(ctx1):
    g = make_graph(ctx1, range(30), [(i, i + 1, 0) for i in range(29)])
    ctx1.meter.reset()
    g.left_join_v(g.vertices)
    assert ctx1.meter.rows() == []


def test_inner_join_v_drops_edges_lazily(ctx):
    g = make_graph(ctx, [1, 2, 3], [(1, 2, 0), (2, 3, 0), (1, 3, 0)])
    t = Collection.from_iterable([(1, 5), (3, 7)], ctx=ctx)
    h = g.inner_join_v(t, lambda a, u: a + u)
    assert h.vertices.to_dict() == {1: 5, 3: 7}
    assert h._edges is None
    assert [k for k, _ in h.triplets.collect()] == [(1, 3)]
    assert h.edges.collect() == [((1, 3), 0)]
    assert h.epoch == g.epoch


def test_subgraph_conjunction_law(ctx):
    ids, edges = random_graph(13, 50, 300, attr=lambda r: r.randrange(10))
    attrs = {v: v % 3 for v in ids}
    g = make_graph(ctx, ids, edges, attrs)

    def vpred(v, a):
        return a != 0

    def epred(t):
        return t.attr % 2 == 0

    h = g.subgraph(vpred, epred)
    keep_v = {v for v in ids if vpred(v, attrs[v])}
    want = [(s, d, a) for s, d, a in edges if s in keep_v and d in keep_v and a % 2 == 0]
    assert set(h.vertices.to_dict()) == keep_v
    assert Counter(h.edges.collect()) == Counter(((s, d), a) for s, d, a in want)
    assert triplet_multiset(h) == oracle_triplets({v: attrs[v] for v in keep_v}, want)
    assert h.epoch == g.epoch


def test_subgraph_predicate_sees_hidden_vertex_as_absent(ctx1):
    g = make_graph(ctx1, [1, 2, 3], [(1, 2, 0), (2, 3, 0)])
    seen = []

    def epred(t):
        seen.append((t.src_id, t.dst_id))
        return True

    g.subgraph(lambda v, a: v != 3, epred)
    assert seen == [(1, 2)]


def test_routing_rebuilt_for_subgraph(ctx1):
    g = make_graph(ctx1, range(6), [(0, 1, 0), (2, 3, 1), (4, 5, 0)])
    h = g.subgraph(epred=reads()(lambda t: t.attr == 0))
    for vp in h.vparts:
        for v, s in vp.index.items():
            if v in (2, 3):
                assert vp.routing.edge_partitions(s) == []


def test_reindex_compacts_and_bumps_epoch(ctx):
    ids, edges = random_graph(14, 40, 200)
    g = make_graph(ctx, ids, edges)
    h = g.subgraph(lambda v, a: v % 2 == 0)
    r = h.reindex()
    assert r.epoch != g.epoch
    assert r.num_slots() == r.num_vertices() == len([v for v in ids if v % 2 == 0])
    assert sum(len(ep) for ep in r.eparts) == h.edges.count()
    assert triplet_multiset(r) == triplet_multiset(h)


def test_repartition_edges_preserves_content(ctx1):
    ids, edges = random_graph(15, 40, 200, attr=lambda r: r.random())
    g = make_graph(ctx1, ids, edges)
    h = g.repartition_edges(EdgePartitioner(EdgeKind.HASH_2D, 4))
    assert h.epoch != g.epoch
    assert Counter(h.edges.collect()) == Counter(g.edges.collect())
    assert triplet_multiset(h) == triplet_multiset(g)


def test_graph_results_independent_of_partitioning():
    ids, edges = random_graph(16, 80, 500, attr=lambda r: r.randrange(9))
    results = []
    for parts, kind in ((1, "input"), (3, "hash2d"), (8, "random1d")):
        with Context(workers=1, num_partitions=parts, partitioner=kind) as ctx:
            g = make_graph(ctx, ids, edges, {v: v for v in ids})
            results.append(g.mr_triplets(lambda t: (t.dst_attr, t.src_attr + t.attr),
                                         lambda a, b: a + b).to_dict())
    assert results[0] == results[1] == results[2]


def test_visibility_bits_consistent():
    ids, edges = random_graph(17, 30, 100)
    with Context(workers=1) as ctx:
        g = make_graph(ctx, ids, edges).mask_vertices(ids[::2])
        vis = g._local_visibility()
        keep = set(ids[::2])
        for ep, bits in zip(g.eparts, vis):
            assert bits.tolist() == [int(v) in keep for v in ep.structure.local_ids]
        assert np.all([b.dtype == bool for b in vis])
