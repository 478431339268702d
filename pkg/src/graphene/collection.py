"""Partitioned, immutable key-value collections (the data-parallel view)."""

from __future__ import annotations

import heapq
from typing import Any, Callable, Iterable, Iterator, Optional

from . import wire
from .context import Context, default_context
from .errors import UDFError
from .partition import HashPartitioner, PartitionAssignment

Pair = tuple[Any, Any]


def _split(data: list, n: int) -> list[list]:
    size, extra = divmod(len(data), n)
    out, start = [], 0
    for i in range(n):
        stop = start + size + (i < extra)
        out.append(data[start:stop])
        start = stop
    return out


class Collection:
    """An unordered multiset of ``(key, value)`` tuples split into partitions.

    Keys may repeat and may be ``None``.  Operators never modify a collection;
    they return new ones.  When ``partitioner`` is set every tuple lives in
    partition ``partitioner(key)``.
    """

    def __init__(self, partitions: Iterable[Iterable[Pair]],
                 partitioner: Optional[PartitionAssignment] = None,
                 ctx: Optional[Context] = None):
        self._partitions = tuple(tuple(p) for p in partitions)
        self.partitioner = partitioner
        self.ctx = ctx or default_context()
        if partitioner is not None and partitioner.num_partitions != len(self._partitions):
            raise ValueError("partitioner does not match the partition count")

    @classmethod
    def from_iterable(cls, data: Iterable[Pair], num_partitions: Optional[int] = None,
                      ctx: Optional[Context] = None,
                      partitioner: Optional[PartitionAssignment] = None) -> "Collection":
        """Split ``data`` into contiguous chunks, or place it by ``partitioner``."""
        ctx = ctx or default_context()
        data = [tuple(t) for t in data]
        if partitioner is not None:
            parts: list[list] = [[] for _ in range(partitioner.num_partitions)]
            for k, v in data:
                parts[partitioner(k)].append((k, v))
            return cls(parts, partitioner, ctx)
        return cls(_split(data, num_partitions or ctx.config.num_partitions), None, ctx)

    # -- views --------------------------------------------------------------

    @property
    def partitions(self) -> tuple[tuple[Pair, ...], ...]:
        return self._partitions

    @property
    def num_partitions(self) -> int:
        return len(self.partitions)

    def __iter__(self) -> Iterator[Pair]:
        for part in self.partitions:
            yield from part

    def collect(self) -> list[Pair]:
        return list(self)

    def count(self) -> int:
        return sum(len(p) for p in self.partitions)

    def __repr__(self):
        return f"{type(self).__name__}(partitions={self.num_partitions}, count={self.count()})"

    # -- narrow operators ---------------------------------------------------

    def filter(self, pred: Callable[[Any, Any], bool]) -> "Collection":
        def run(part):
            k = None
            try:
                return [(k, v) for k, v in part if pred(k, v)]
            except Exception as exc:
                raise UDFError(k, exc) from exc
        return Collection(self.ctx.map(run, self.partitions), self.partitioner, self.ctx)

    def map(self, f: Callable[[Any, Any], Pair]) -> "Collection":
        def run(part):
            out, k = [], None
            try:
                for k, v in part:
                    k2, v2 = f(k, v)
                    out.append((k2, v2))
            except Exception as exc:
                raise UDFError(k, exc) from exc
            return out
        return Collection(self.ctx.map(run, self.partitions), None, self.ctx)

    def top(self, k: int, key: Callable[[Pair], Any]) -> list[Pair]:
        """The ``k`` tuples with largest ``key`` (all of them when ``k`` exceeds the count)."""
        return heapq.nlargest(k, self, key=key)

    # -- wide operators -----------------------------------------------------

    def partition_by(self, partitioner: PartitionAssignment, name: str = "collection.partitionBy") -> "Collection":
        if partitioner == self.partitioner:
            return self
        return Collection(_exchange(self, partitioner, name), partitioner, self.ctx)

    def reduce_by_key(self, reduce: Callable[[Any, Any], Any],
                      partitioner: Optional[PartitionAssignment] = None,
                      name: str = "collection.reduceByKey") -> "Collection":
        """One tuple per distinct key (``None`` is one key), hash-partitioned."""
        target = partitioner or HashPartitioner(self.num_partitions)

        def combine(part):
            acc: dict = {}
            k = None
            try:
                for k, v in part:
                    acc[k] = reduce(acc[k], v) if k in acc else v
            except Exception as exc:
                raise UDFError(k, exc) from exc
            return list(acc.items())

        local = self.ctx.map(combine, self.partitions)
        if target == self.partitioner:
            return Collection(local, target, self.ctx)
        moved = _exchange(Collection(local, None, self.ctx), target, name)
        return Collection(self.ctx.map(combine, moved), target, self.ctx)

    def left_join(self, other: "Collection") -> "Collection":
        """Left outer equi-join; unmatched (and ``None``) keys pair with ``None``.

        Co-partitioned inputs join locally; otherwise ``other`` is moved to this
        collection's partitioning (and this side too, if it has none).
        """
        target = self.partitioner
        left = self.partitions
        if target is None:
            target = HashPartitioner(self.num_partitions)
            left = _exchange(self, target, "collection.leftJoin.left")
        right = other.partitions if other.partitioner == target else _exchange(other, target, "collection.leftJoin")

        def join(pair):
            lpart, rpart = pair
            index: dict = {}
            for k, u in rpart:
                if k is not None:
                    index.setdefault(k, []).append(u)
            out = []
            for k, v in lpart:
                matches = index.get(k) if k is not None else None
                if matches:
                    out.extend((k, (v, u)) for u in matches)
                else:
                    out.append((k, (v, None)))
            return out

        return Collection(self.ctx.map(join, list(zip(left, right))), target, self.ctx)


def _exchange(c: Collection, target: PartitionAssignment, name: str) -> list[list[Pair]]:
    """Move every tuple of ``c`` to ``target(key)`` through encoded keyed blocks."""
    n = target.num_partitions

    def encode(part):
        buckets: list[list] = [[] for _ in range(n)]
        for k, v in part:
            buckets[target(k)].append((wire.serialize(k), wire.serialize(v)))
        return [(wire.encode_keyed_block(b), len(b)) if b else None for b in buckets]

    inbox = c.ctx.shuffle(name, c.ctx.map(encode, c.partitions), n)

    def decode(blocks):
        out = []
        for _, block in blocks:
            out.extend((wire.deserialize(k), wire.deserialize(v)) for k, v in wire.decode_keyed_block(block))
        return out

    return c.ctx.map(decode, inbox)


def serialized_size(c: Collection, target: PartitionAssignment) -> int:
    """Bytes ``c`` occupies on the wire when moved to ``target`` (for tests and reports)."""
    total = 0
    for part in c.partitions:
        buckets: list[list] = [[] for _ in range(target.num_partitions)]
        for k, v in part:
            buckets[target(k)].append((wire.serialize(k), wire.serialize(v)))
        total += sum(len(wire.encode_keyed_block(b)) for b in buckets if b)
    return total
