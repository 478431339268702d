"""Replicated vertex views: per edge partition mirrors of endpoint attributes,
shipped along routing tables and maintained incrementally."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import wire
from .plan import AccessSpec

VIEW_EXCHANGE = "view.ship"


class Mirror:
    """Attributes of one edge partition's endpoints, indexed by local position.

    ``have`` marks positions holding a shipped value; ``changed`` marks the
    positions written by the most recent shipment.
    """

    __slots__ = ("attrs", "have", "changed")

    def __init__(self, attrs: list, have: np.ndarray, changed: np.ndarray):
        self.attrs = attrs
        self.have = have
        self.changed = changed

    def values(self, structure) -> dict[int, object]:
        ids = structure.local_ids.tolist()
        return {ids[i]: self.attrs[i] for i in np.nonzero(self.have)[0].tolist()}


class ReplicatedVertexView:
    def __init__(self, epoch: int, sides: frozenset, mirrors: list[Mirror],
                 changed_slots: list[np.ndarray], shipped: int):
        self.epoch = epoch
        self.sides = sides
        self.mirrors = mirrors
        # vertex-side record of which slots the last shipment treated as changed
        self.changed_slots = changed_slots
        self.shipped = shipped

    def mirror_dict(self, e: int, structure) -> dict[int, object]:
        return self.mirrors[e].values(structure)


def _sides(spec) -> frozenset:
    return spec.sides if isinstance(spec, AccessSpec) else frozenset(spec)


def _ship(g, select: Sequence[np.ndarray], base: ReplicatedVertexView | None,
          sides: frozenset, changed_slots: list[np.ndarray]) -> ReplicatedVertexView:
    """Send the slots marked in ``select[k][e]`` from vertex partition ``k`` to
    edge partition ``e`` and apply them on top of ``base``'s mirrors."""
    ctx, vparts, eparts = g.ctx, g.vparts, g.eparts

    def send(k):
        vp = vparts[k]
        sel_k = select[k]
        # serialize each shipped vertex once, whatever its fan-out
        any_slots = np.nonzero(sel_k.any(axis=0))[0] if sel_k.size else np.zeros(0, dtype=np.int64)
        values = vp.values
        encoded = wire.serialize_many([values[s] for s in any_slots.tolist()])
        where = np.full(len(vp), -1, dtype=np.int64)
        where[any_slots] = np.arange(len(any_slots))
        row = []
        for e in range(len(eparts)):
            slots = np.nonzero(sel_k[e])[0]
            if not len(slots):
                row.append(None)
                continue
            payloads = [encoded[j] for j in where[slots].tolist()]
            row.append((wire.encode_id_block(vp.ids[slots], payloads), len(slots)))
        return row

    inbox = ctx.shuffle(VIEW_EXCHANGE, ctx.map(send, range(len(vparts))), len(eparts))

    def receive(e):
        structure = eparts[e].structure
        n = len(structure.local_ids)
        if base is not None:
            old = base.mirrors[e]
            attrs, have = list(old.attrs), old.have.copy()
        else:
            attrs, have = [None] * n, np.zeros(n, dtype=bool)
        changed = np.zeros(n, dtype=bool)
        for _, block in inbox[e]:
            ids, payloads = wire.decode_id_block(block)
            local = structure.local_positions(ids)
            for li, v in zip(local.tolist(), wire.deserialize_many(payloads)):
                attrs[li] = v
            have[local] = True
            changed[local] = True
        return Mirror(attrs, have, changed)

    mirrors = ctx.map(receive, range(len(eparts)))
    shipped = int(sum(int(sel.sum()) for rows in select for sel in rows))
    return ReplicatedVertexView(g.epoch, sides, mirrors, changed_slots, shipped)


def materialize_view(g, spec) -> ReplicatedVertexView:
    """Ship every visible vertex to the edge partitions routed for the requested sides."""
    sides = _sides(spec)
    select = []
    for vp in g.vparts:
        select.append(vp.routing.present(sides) & vp.mask[None, :])
    return _ship(g, select, None, sides, [vp.mask.copy() for vp in g.vparts])


def incremental_update(view: ReplicatedVertexView, g, changed: Sequence[np.ndarray],
                       spec=None) -> ReplicatedVertexView:
    """Ship only changed vertices, plus routed vertices of sides the view lacks.

    ``changed[k]`` flags slots of vertex partition ``k`` whose value may differ
    from the mirrored one.  A view from another index epoch is rebuilt.
    """
    sides = view.sides | (_sides(spec) if spec is not None else frozenset())
    if view.epoch != g.epoch:
        return materialize_view(g, sides)
    select, changed_slots = [], []
    for vp, ch in zip(g.vparts, changed):
        routed = vp.routing.present(sides) & vp.mask[None, :]
        missing = routed & ~vp.routing.present(view.sides)
        select.append((routed & ch[None, :]) | missing)
        changed_slots.append(ch & vp.mask)
    return _ship(g, select, view, sides, changed_slots)
