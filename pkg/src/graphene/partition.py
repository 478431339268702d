"""Partition assignment: key hashing for collections and vertex stores, and
edge partitioners (including the 2D grid hash) for the edge store."""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable

import numpy as np

from . import kernels, wire
from .errors import ConfigError


def hash_key(key: Any, seed: int = 0) -> int:
    """Deterministic 64-bit hash of a collection key (stable across runs)."""
    if type(key) is int and 0 <= key <= wire.MAX_ID:
        return kernels.hash64(key, seed)
    digest = hashlib.blake2b(wire.serialize(key), digest_size=8,
                             salt=seed.to_bytes(8, "little")).digest()
    return int.from_bytes(digest, "little")


class PartitionAssignment:
    """Maps keys to partition indices in ``[0, num_partitions)``."""

    num_partitions: int

    def __call__(self, key) -> int:
        raise NotImplementedError

    def assign_ids(self, ids: np.ndarray) -> np.ndarray:
        return np.fromiter((self(int(i)) for i in ids), dtype=np.int64, count=len(ids))


@dataclass(frozen=True)
class HashPartitioner(PartitionAssignment):
    num_partitions: int
    seed: int = 0

    def __post_init__(self):
        if self.num_partitions < 1:
            raise ConfigError("num_partitions must be positive")

    def __call__(self, key) -> int:
        return hash_key(key, self.seed) % self.num_partitions

    def assign_ids(self, ids: np.ndarray) -> np.ndarray:
        h = kernels.hash64_array(np.asarray(ids, dtype=np.uint64), self.seed)
        return (h % np.uint64(self.num_partitions)).astype(np.int64)


class EdgeKind(str, enum.Enum):
    INPUT = "input"
    RANDOM_1D = "random1d"
    SRC_HASH_1D = "srchash1d"
    HASH_2D = "hash2d"


def assign_2d(src: int, dst: int, p: int, hash_fn: Callable[[int], int] | None = None) -> int:
    """Grid cell of edge ``src -> dst`` on a ``ceil(sqrt(p))`` square grid.

    Rows are chosen by the source hash and columns by the target hash, so the
    edges of one vertex touch at most ``2 * ceil(sqrt(p)) - 1`` cells.  Cells
    beyond ``p`` fold back modulo ``p``, which can only merge cells.
    """
    if p < 1:
        raise ConfigError("number of partitions must be positive")
    h = hash_fn or kernels.hash64
    r = math.isqrt(p - 1) + 1
    return ((h(src) % r) * r + h(dst) % r) % p


@dataclass(frozen=True)
class EdgePartitioner:
    kind: EdgeKind = EdgeKind.HASH_2D
    num_partitions: int = 4
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "kind", EdgeKind(self.kind))
        if self.num_partitions < 1:
            raise ConfigError("number of edge partitions must be positive")

    @classmethod
    def parse(cls, name: str, num_partitions: int, seed: int = 42) -> "EdgePartitioner":
        try:
            kind = EdgeKind(name.lower())
        except ValueError:
            raise ConfigError(f"unknown partitioner {name!r}; expected one of "
                              f"{[k.value for k in EdgeKind]}") from None
        return cls(kind, num_partitions, seed)

    def assign(self, src: int, dst: int) -> int:
        return int(self.assign_arrays(np.array([src], dtype=np.uint64),
                                      np.array([dst], dtype=np.uint64))[0])

    def assign_arrays(self, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
        p = np.uint64(self.num_partitions)
        src = np.asarray(src, dtype=np.uint64)
        dst = np.asarray(dst, dtype=np.uint64)
        if self.kind is EdgeKind.INPUT:
            raise ConfigError("the input partitioner keeps existing placement and assigns nothing")
        if self.kind is EdgeKind.RANDOM_1D:
            mixed = kernels.hash64_array(src, self.seed) ^ dst
            out = kernels.hash64_array(mixed, self.seed) % p
        elif self.kind is EdgeKind.SRC_HASH_1D:
            out = kernels.hash64_array(src) % p
        else:
            r = np.uint64(math.isqrt(self.num_partitions - 1) + 1)
            row = kernels.hash64_array(src) % r
            col = kernels.hash64_array(dst) % r
            out = (row * r + col) % p
        return out.astype(np.int64)

    def span_bound(self) -> int | None:
        """Upper bound on distinct partitions touched by one vertex's edges."""
        if self.kind is EdgeKind.HASH_2D:
            return 2 * (math.isqrt(self.num_partitions - 1) + 1) - 1
        return None


def vertex_spans(edges: Iterable[tuple[int, int]], assign: Callable[[int, int], int]) -> dict[int, int]:
    """Number of distinct partitions holding edges of each vertex."""
    parts: dict[int, set] = {}
    for s, d in edges:
        e = assign(s, d)
        parts.setdefault(s, set()).add(e)
        parts.setdefault(d, set()).add(e)
    return {v: len(ps) for v, ps in parts.items()}


def replication_factor(spans: dict[int, int]) -> float:
    """Mean number of vertex copies across edge partitions."""
    return sum(spans.values()) / len(spans) if spans else 0.0


def repartition_edges(g, partitioner: EdgePartitioner):
    return g.repartition_edges(partitioner)
