from collections import Counter, defaultdict

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphene import Collection, Context, HashPartitioner, UDFError
from graphene.collection import serialized_size

pairs = st.lists(st.tuples(st.one_of(st.none(), st.integers(-5, 20), st.text(max_size=2)),
                           st.integers(-100, 100)), max_size=60)


def test_from_iterable_splits_contiguously(ctx):
    c = Collection.from_iterable([(i, i) for i in range(10)], 3, ctx)
    assert [len(p) for p in c.partitions] == [4, 3, 3]
    assert c.collect() == [(i, i) for i in range(10)]


def test_filter_map_count(ctx):
    c = Collection.from_iterable([(i, i * i) for i in range(10)], ctx=ctx)
    assert c.filter(lambda k, v: v % 2 == 0).count() == 5
    assert sorted(c.map(lambda k, v: (v, k)).collect())[:3] == [(0, 0), (1, 1), (4, 2)]
    assert Collection.from_iterable([], ctx=ctx).count() == 0


def test_udf_error_names_key(ctx):
    c = Collection.from_iterable([(1, 1), (2, 0)], ctx=ctx)
    with pytest.raises(UDFError) as info:
        c.map(lambda k, v: (k, 1 / v)).collect()
    assert info.value.key == 2


@settings(max_examples=80, deadline=None)
@given(pairs)
def test_reduce_by_key_matches_groupby(data):
    with Context(workers=1) as ctx:
        got = Collection.from_iterable(data, 3, ctx).reduce_by_key(lambda a, b: a + b)
        expected = defaultdict(int)
        for k, v in data:
            expected[k] += v
        assert sorted(got.collect(), key=repr) == sorted(expected.items(), key=repr)
        assert got.partitioner == HashPartitioner(3)
        for i, part in enumerate(got.partitions):
            assert all(got.partitioner(k) == i for k, _ in part)


@settings(max_examples=80, deadline=None)
@given(pairs, pairs)
def test_left_join_matches_nested_loop(left, right):
    with Context(workers=1) as ctx:
        got = Collection.from_iterable(left, 2, ctx).left_join(Collection.from_iterable(right, 3, ctx))
        expected = []
        for k, v in left:
            matches = [u for k2, u in right if k is not None and k2 == k]
            expected += [(k, (v, u)) for u in matches] or [(k, (v, None))]
        assert Counter(map(repr, got.collect())) == Counter(map(repr, expected))


def test_null_keys_group_but_never_join(ctx1):
    c = Collection.from_iterable([(None, 1), (None, 2), (1, 5)], ctx=ctx1)
    assert sorted(c.reduce_by_key(lambda a, b: a + b).collect(), key=repr) == [(1, 5), (None, 3)]
    j = c.left_join(Collection.from_iterable([(None, "x"), (1, "y")], ctx=ctx1))
    assert sorted(j.collect(), key=repr) == [(1, (5, "y")), (None, (1, None)), (None, (2, None))]


def test_copartitioned_join_has_no_exchange(ctx1):
    p = HashPartitioner(4)
    a = Collection.from_iterable([(i, i) for i in range(50)], ctx=ctx1, partitioner=p)
    b = Collection.from_iterable([(i, -i) for i in range(0, 50, 2)], ctx=ctx1, partitioner=p)
    ctx1.meter.reset()
    out = a.left_join(b)
    assert ctx1.meter.rows() == []
    assert dict(out.collect())[4] == (4, -4)


def test_reduce_skips_exchange_when_partitioned(ctx1):
    p = HashPartitioner(4)
    a = Collection.from_iterable([(i % 7, 1) for i in range(50)], ctx=ctx1, partitioner=p)
    ctx1.meter.reset()
    a.reduce_by_key(lambda x, y: x + y, p)
    assert ctx1.meter.rows() == []


def test_metered_bytes_equal_block_lengths(ctx1):
    data = [(i % 13, "v" * (i % 5)) for i in range(200)]
    c = Collection.from_iterable(data, 4, ctx1)
    target = HashPartitioner(4)
    ctx1.meter.reset()
    c.partition_by(target)
    assert ctx1.meter.total_bytes("collection.partitionBy") == serialized_size(c, target)
    assert ctx1.meter.total_tuples("collection.partitionBy") == 200


def test_top_clamps(ctx1):
    c = Collection.from_iterable([(i, float(i)) for i in range(5)], ctx=ctx1)
    assert c.top(2, key=lambda kv: kv[1]) == [(4, 4.0), (3, 3.0)]
    assert len(c.top(10, key=lambda kv: kv[1])) == 5


def test_results_independent_of_workers():
    data = [(i % 17, i) for i in range(300)]
    outs = []
    for w in (1, 4):
        with Context(workers=w) as ctx:
            outs.append(Collection.from_iterable(data, 5, ctx).reduce_by_key(lambda a, b: a + b).partitions)
    assert outs[0] == outs[1]
