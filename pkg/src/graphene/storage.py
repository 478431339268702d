"""Physical graph storage: hash-indexed vertex partitions with visibility
bitmasks and routing tables, and CSR-clustered edge partitions."""

from __future__ import annotations

from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

from . import wire

SRC_FLAG = 1
DST_FLAG = 2


class RoutingTable:
    """Per edge partition, which local vertex slots have an edge there.

    ``src[e, slot]`` is set when some edge of partition ``e`` has the vertex as
    source; ``dst`` likewise for targets.  Plain fixed-width bitsets.
    """

    __slots__ = ("src", "dst")

    def __init__(self, src: np.ndarray, dst: np.ndarray):
        self.src = src
        self.dst = dst

    @classmethod
    def empty(cls, num_edge_partitions: int, num_slots: int) -> "RoutingTable":
        shape = (num_edge_partitions, num_slots)
        return cls(np.zeros(shape, dtype=bool), np.zeros(shape, dtype=bool))

    @property
    def num_edge_partitions(self) -> int:
        return self.src.shape[0]

    def present(self, sides: Iterable[str] = ("src", "dst")) -> np.ndarray:
        """Boolean ``(edge partitions, slots)`` matrix for the requested sides."""
        out = np.zeros(self.src.shape, dtype=bool)
        for side in sides:
            out |= self.src if side == "src" else self.dst
        return out

    def edge_partitions(self, slot: int) -> list[int]:
        return np.nonzero(self.src[:, slot] | self.dst[:, slot])[0].tolist()

    def __eq__(self, other):
        return (isinstance(other, RoutingTable) and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst))


class VertexPartition:
    """Vertices hashed to one partition.

    ``index`` maps id to slot and is shared by every partition derived without
    changing structure; ``values`` holds attributes by slot; ``mask`` marks
    visible slots.  Hidden slots keep their id and attribute.
    """

    __slots__ = ("index", "ids", "values", "mask", "routing", "__dict__")

    def __init__(self, index: dict, ids: np.ndarray, values: list, mask: np.ndarray,
                 routing: RoutingTable):
        self.index = index
        self.ids = ids
        self.values = values
        self.mask = mask
        self.routing = routing

    def __len__(self):
        return len(self.ids)

    @cached_property
    def _sorted(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.ids, kind="stable")
        return self.ids[order], order

    def lookup(self, ids: np.ndarray) -> np.ndarray:
        """Slots of ``ids`` (-1 where absent)."""
        keys, order = self._sorted
        ids = np.asarray(ids, dtype=np.uint64)
        if not len(keys):
            return np.full(len(ids), -1, dtype=np.int64)
        pos = np.searchsorted(keys, ids)
        pos_c = np.minimum(pos, len(keys) - 1)
        hit = keys[pos_c] == ids
        return np.where(hit, order[pos_c], -1).astype(np.int64)

    def with_values(self, values: list) -> "VertexPartition":
        vp = VertexPartition(self.index, self.ids, values, self.mask, self.routing)
        vp.__dict__.update(self.__dict__)
        return vp

    def with_mask(self, mask: np.ndarray, routing: RoutingTable | None = None) -> "VertexPartition":
        vp = VertexPartition(self.index, self.ids, self.values, mask, routing or self.routing)
        vp.__dict__.update(self.__dict__)
        return vp

    def mask_and(self, keep: Iterable[int]) -> "VertexPartition":
        keep_arr = np.fromiter((k for k in keep if type(k) is int and 0 <= k <= wire.MAX_ID),
                               dtype=np.uint64)
        member = np.zeros(len(self.ids), dtype=bool)
        slots = self.lookup(keep_arr)
        member[slots[slots >= 0]] = True
        return self.with_mask(self.mask & member)

    def visible_slots(self) -> np.ndarray:
        return np.nonzero(self.mask)[0]

    def visible_ids(self) -> list[int]:
        return self.ids[self.mask].tolist()

    def items(self) -> list[tuple[int, Any]]:
        """Visible ``(id, attribute)`` pairs in slot order."""
        ids, values = self.ids.tolist(), self.values
        return [(ids[s], values[s]) for s in self.visible_slots().tolist()]


def build_vertex_partition(tuples: Sequence[tuple[int, Any]],
                           routing_inputs: Sequence[tuple[np.ndarray, np.ndarray]],
                           default: Any = None) -> VertexPartition:
    """Index ``tuples`` and attach routing.

    ``routing_inputs[e]`` holds ``(ids, flags)`` of this partition's vertices
    that appear in edge partition ``e``.  Ids routed but absent from ``tuples``
    are added with ``default`` in order of first appearance.
    """
    index: dict[int, int] = {}
    ids: list[int] = []
    values: list = []
    for vid, attr in tuples:
        vid = wire.check_id(vid)
        if vid in index:
            raise ValueError(f"duplicate vertex id {vid} in partition input")
        index[vid] = len(ids)
        ids.append(vid)
        values.append(attr)
    for e_ids, _ in routing_inputs:
        for vid in e_ids.tolist():
            if vid not in index:
                index[vid] = len(ids)
                ids.append(vid)
                values.append(default)
    id_arr = np.array(ids, dtype=np.uint64)
    vp = VertexPartition(index, id_arr, values, np.ones(len(ids), dtype=bool),
                         RoutingTable.empty(len(routing_inputs), len(ids)))
    vp.routing = routing_from_inputs(vp, routing_inputs)
    return vp


def routing_from_inputs(vp: VertexPartition,
                        routing_inputs: Sequence[tuple[np.ndarray, np.ndarray]]) -> RoutingTable:
    table = RoutingTable.empty(len(routing_inputs), len(vp.ids))
    for e, (e_ids, flags) in enumerate(routing_inputs):
        if not len(e_ids):
            continue
        slots = vp.lookup(e_ids)
        if np.any(slots < 0):
            raise ValueError("routing references a vertex missing from the partition")
        table.src[e, slots[(flags & SRC_FLAG) != 0]] = True
        table.dst[e, slots[(flags & DST_FLAG) != 0]] = True
    return table


class EdgeStructure:
    """Immutable CSR layout of one edge partition, shared across derived graphs.

    Edges are stably sorted by source; ``csr_keys``/``csr_offsets`` address each
    source's contiguous block.  ``local_ids`` lists every endpoint (sorted) and
    ``local_src``/``local_dst`` map edges to positions in it.
    """

    def __init__(self, src: np.ndarray, dst: np.ndarray):
        self.src = src
        self.dst = dst
        n = len(src)
        self.csr_keys, starts = np.unique(src, return_index=True) if n else (src[:0], np.zeros(0, dtype=np.int64))
        self.csr_offsets = np.append(starts, n).astype(np.int64)
        self.local_ids = np.union1d(src, dst).astype(np.uint64)
        self.local_src = np.searchsorted(self.local_ids, src).astype(np.int64)
        self.local_dst = np.searchsorted(self.local_ids, dst).astype(np.int64)
        self.src_start = np.searchsorted(src, self.local_ids, side="left")
        self.src_end = np.searchsorted(src, self.local_ids, side="right")
        self.dst_perm = np.argsort(dst, kind="stable")
        sorted_dst = dst[self.dst_perm]
        self.dst_start = np.searchsorted(sorted_dst, self.local_ids, side="left")
        self.dst_end = np.searchsorted(sorted_dst, self.local_ids, side="right")

    def __len__(self):
        return len(self.src)

    @cached_property
    def src_list(self) -> list[int]:
        return self.src.tolist()

    @cached_property
    def dst_list(self) -> list[int]:
        return self.dst.tolist()

    @cached_property
    def csr_index(self) -> dict[int, tuple[int, int]]:
        """Source id -> (offset, length) of its out-edge block."""
        offs = self.csr_offsets.tolist()
        return {k: (offs[i], offs[i + 1] - offs[i]) for i, k in enumerate(self.csr_keys.tolist())}

    @cached_property
    def dst_index(self) -> dict[int, np.ndarray]:
        """Target id -> positions of its in-edges (unclustered)."""
        out = {}
        for li, vid in enumerate(self.local_ids.tolist()):
            a, b = self.dst_start[li], self.dst_end[li]
            if b > a:
                out[vid] = self.dst_perm[a:b]
        return out

    def local_positions(self, ids: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.local_ids, ids)
        pos_c = np.minimum(pos, max(len(self.local_ids) - 1, 0))
        if len(self.local_ids) == 0 or np.any(self.local_ids[pos_c] != ids):
            raise ValueError("id not present in edge partition")
        return pos_c

    def out_positions(self, active_local: np.ndarray) -> np.ndarray:
        """Edge positions whose source is one of the ``active_local`` vertices (CSR probe)."""
        return _ranges(self.src_start[active_local], self.src_end[active_local])

    def in_positions(self, active_local: np.ndarray) -> np.ndarray:
        """Edge positions whose target is one of ``active_local`` (target index probe)."""
        return self.dst_perm[_ranges(self.dst_start[active_local], self.dst_end[active_local])]


def _ranges(starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    lengths = ends - starts
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    keep = lengths > 0
    starts, lengths = starts[keep], lengths[keep]
    offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(lengths)[:-1])), lengths)
    return (np.arange(total) + offsets).astype(np.int64)


class EdgePartition:
    """One edge partition: shared structure, attributes by position, and a
    visibility mask over edges."""

    __slots__ = ("structure", "attrs", "mask")

    def __init__(self, structure: EdgeStructure, attrs: list, mask: np.ndarray | None = None):
        self.structure = structure
        self.attrs = attrs
        self.mask = np.ones(len(structure), dtype=bool) if mask is None else mask

    @classmethod
    def build(cls, edges: Sequence[tuple[int, int, Any]]) -> "EdgePartition":
        n = len(edges)
        src = np.fromiter((wire.check_id(e[0]) for e in edges), dtype=np.uint64, count=n)
        dst = np.fromiter((wire.check_id(e[1]) for e in edges), dtype=np.uint64, count=n)
        order = np.argsort(src, kind="stable")
        attrs = [edges[i][2] for i in order.tolist()]
        return cls(EdgeStructure(src[order], dst[order]), attrs)

    def __len__(self):
        return len(self.structure)

    # aliases matching the column names used in docs and tests
    @property
    def src_ids(self) -> np.ndarray:
        return self.structure.src

    @property
    def dst_ids(self) -> np.ndarray:
        return self.structure.dst

    @property
    def csr_index(self):
        return self.structure.csr_index

    @property
    def dst_index(self):
        return self.structure.dst_index

    def with_attrs(self, attrs: list) -> "EdgePartition":
        return EdgePartition(self.structure, attrs, self.mask)

    def with_mask(self, mask: np.ndarray) -> "EdgePartition":
        return EdgePartition(self.structure, self.attrs, mask)

    def edges(self, positions: Iterable[int] | None = None) -> list[tuple[int, int, Any]]:
        s = self.structure
        if positions is None:
            positions = np.nonzero(self.mask)[0].tolist()
        src, dst, attrs = s.src_list, s.dst_list, self.attrs
        return [(src[i], dst[i], attrs[i]) for i in positions]

    def endpoint_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted distinct endpoint ids of visible edges with src/dst flags."""
        s = self.structure
        flags = np.zeros(len(s.local_ids), dtype=np.uint8)
        flags[s.local_src[self.mask]] |= SRC_FLAG
        flags[s.local_dst[self.mask]] |= DST_FLAG
        keep = flags != 0
        return s.local_ids[keep], flags[keep]


def build_edge_partition(edges: Sequence[tuple[int, int, Any]]) -> EdgePartition:
    return EdgePartition.build(edges)


def mask_and(vp: VertexPartition, keep: Iterable[int]) -> VertexPartition:
    return vp.mask_and(keep)
