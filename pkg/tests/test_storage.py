import random
from collections import Counter

import numpy as np
import pytest

from graphene import HashPartitioner
from graphene.storage import (DST_FLAG, SRC_FLAG, EdgePartition, RoutingTable,
                              build_vertex_partition, mask_and)
from oracles import random_graph


def routing_inputs_for(eparts, ids):
    """Per edge partition ``(ids, flags)`` restricted to ``ids``, by enumeration."""
    wanted = set(ids)
    out = []
    for ep in eparts:
        flags = {}
        for s, d, _ in ep.edges():
            if s in wanted:
                flags[s] = flags.get(s, 0) | SRC_FLAG
            if d in wanted:
                flags[d] = flags.get(d, 0) | DST_FLAG
        keys = sorted(flags)
        out.append((np.array(keys, dtype=np.uint64), np.array([flags[k] for k in keys], dtype=np.uint8)))
    return out


def test_edge_partition_clusters_by_source():
    ep = EdgePartition.build([(2, 3, "x"), (1, 4, "y"), (2, 5, "z")])
    assert ep.src_ids.tolist() == [1, 2, 2]
    assert ep.dst_ids.tolist() == [4, 3, 5]
    assert ep.attrs == ["y", "x", "z"]
    assert ep.csr_index == {1: (0, 1), 2: (1, 2)}
    assert {k: v.tolist() for k, v in ep.dst_index.items()} == {3: [1], 4: [0], 5: [2]}


def test_empty_edge_partition():
    ep = EdgePartition.build([])
    assert len(ep) == 0 and ep.csr_index == {} and ep.dst_index == {}
    assert ep.endpoint_table()[0].tolist() == []


def test_csr_blocks_reproduce_multiset():
    _, edges = random_graph(3, 40, 200, attr=lambda r: r.randrange(5))
    ep = EdgePartition.build(edges)
    rebuilt = []
    for s, (off, n) in ep.csr_index.items():
        block = range(off, off + n)
        assert all(ep.src_ids[i] == s for i in block)
        rebuilt += [(s, int(ep.dst_ids[i]), ep.attrs[i]) for i in block]
    assert Counter(rebuilt) == Counter(edges)
    assert sorted(edges, key=lambda e: e[0]) == [(int(a), int(b), c) for a, b, c in
                                                zip(ep.src_ids, ep.dst_ids, ep.attrs)]


def test_dst_index_and_position_probes():
    _, edges = random_graph(4, 30, 150)
    ep = EdgePartition.build(edges)
    s = ep.structure
    for li, vid in enumerate(s.local_ids.tolist()):
        outs = s.out_positions(np.array([li])).tolist()
        ins = sorted(s.in_positions(np.array([li])).tolist())
        assert outs == [i for i in range(len(ep)) if ep.src_ids[i] == vid]
        assert ins == [i for i in range(len(ep)) if ep.dst_ids[i] == vid]


def test_routing_single_edge_and_isolated_vertex():
    ep = EdgePartition.build([(1, 2, None)])
    vp = build_vertex_partition([(1, "a"), (2, "b"), (5, "c")], routing_inputs_for([ep], [1, 2, 5]))
    assert vp.routing.src[0].tolist() == [True, False, False]
    assert vp.routing.dst[0].tolist() == [False, True, False]
    assert vp.routing.edge_partitions(vp.index[5]) == []


def test_routing_matches_enumeration_oracle():
    ids, edges = random_graph(5, 30, 100)
    rnd = random.Random(0)
    parts = [[], [], []]
    for e in edges:
        parts[rnd.randrange(3)].append(e)
    eparts = [EdgePartition.build(p) for p in parts]
    vpart = HashPartitioner(2)
    for k in range(2):
        mine = [v for v in ids if vpart(v) == k]
        vp = build_vertex_partition([(v, 0) for v in mine], routing_inputs_for(eparts, mine))
        for v in mine:
            slot = vp.index[v]
            expect = {e for e, p in enumerate(parts) for s, d, _ in p if v in (s, d)}
            assert set(vp.routing.edge_partitions(slot)) == expect
            for e, p in enumerate(parts):
                assert vp.routing.src[e, slot] == any(s == v for s, _, _ in p)
                assert vp.routing.dst[e, slot] == any(d == v for _, d, _ in p)


def test_routed_only_ids_get_default_and_duplicates_rejected():
    ep = EdgePartition.build([(1, 9, None)])
    vp = build_vertex_partition([(1, "a")], routing_inputs_for([ep], [1, 9]), default="dflt")
    assert dict(vp.items()) == {1: "a", 9: "dflt"}
    with pytest.raises(ValueError):
        build_vertex_partition([(1, "a"), (1, "b")], [])


def test_mask_and_shares_index():
    vp = build_vertex_partition([(1, "a"), (2, "b")], [])
    out = mask_and(vp, {1, 77})
    assert out.index is vp.index and out.values is vp.values
    assert out.mask.tolist() == [True, False]
    assert mask_and(vp, {1, 2}).mask.tolist() == [True, True]
    rnd = random.Random(2)
    ids = rnd.sample(range(1000), 60)
    vp = build_vertex_partition([(i, None) for i in ids], [])
    a = set(rnd.sample(ids, 30))
    b = set(rnd.sample(ids, 30)) | {5000}
    assert set(mask_and(mask_and(vp, a), b).visible_ids()) == a & b


def test_lookup_absent_is_minus_one():
    vp = build_vertex_partition([(10, 0), (3, 0)], [])
    assert vp.lookup(np.array([3, 4, 10], dtype=np.uint64)).tolist() == [1, -1, 0]


def test_routing_equality():
    a = RoutingTable.empty(2, 3)
    b = RoutingTable.empty(2, 3)
    assert a == b
    b.src[0, 1] = True
    assert a != b
