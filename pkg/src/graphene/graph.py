"""Property graphs over partitioned vertex and edge stores, and the graph
operators (construction, views, maps, joins, restriction, mrTriplets)."""

from __future__ import annotations

from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from . import wire
from .collection import Collection
from .context import Context, default_context
from .errors import AccessViolation, UDFError
from .partition import EdgeKind, EdgePartitioner, HashPartitioner
from .plan import (BOTH, AccessSpec, Direction, JoinPlan, ScanMode, ScanStrategy, access_of,
                   choose_scan, parse_direction, plan_join)
from .storage import (EdgePartition, VertexPartition, build_vertex_partition,
                      routing_from_inputs)
from .view import ReplicatedVertexView, incremental_update, materialize_view

MESSAGE_EXCHANGE = "mrTriplets.messages"


class Triplet:
    """An edge with both endpoint attributes."""

    __slots__ = ("src_id", "dst_id", "src_attr", "attr", "dst_attr")

    def __init__(self, src_id, dst_id, src_attr, attr, dst_attr):
        self.src_id = src_id
        self.dst_id = dst_id
        self.src_attr = src_attr
        self.attr = attr
        self.dst_attr = dst_attr

    def as_tuple(self):
        return (self.src_id, self.dst_id), (self.src_attr, self.attr, self.dst_attr)

    def __repr__(self):
        return f"Triplet({self.src_id}->{self.dst_id}, {self.src_attr!r}, {self.attr!r}, {self.dst_attr!r})"


class GuardedTriplet:
    """Triplet used in verification mode: reading an undeclared side raises."""

    __slots__ = ("src_id", "dst_id", "attr", "_src", "_dst", "_spec")

    def __init__(self, src_id, dst_id, src_attr, attr, dst_attr, spec: AccessSpec):
        self.src_id = src_id
        self.dst_id = dst_id
        self.attr = attr
        self._src = src_attr
        self._dst = dst_attr
        self._spec = spec

    @property
    def src_attr(self):
        if not self._spec.reads_src:
            raise AccessViolation(f"UDF read the source attribute of {self.src_id}->{self.dst_id} "
                                  "without declaring it")
        return self._src

    @property
    def dst_attr(self):
        if not self._spec.reads_dst:
            raise AccessViolation(f"UDF read the target attribute of {self.src_id}->{self.dst_id} "
                                  "without declaring it")
        return self._dst

    def as_tuple(self):
        return (self.src_id, self.dst_id), (self.src_attr, self.attr, self.dst_attr)


def _apply_udf(fn: Callable, triplets: list) -> list:
    try:
        return list(map(fn, triplets))
    except AccessViolation:
        raise
    except Exception:
        pass
    # locate the failing edge (UDFs are pure, so re-running is safe)
    out = []
    for t in triplets:
        try:
            out.append(fn(t))
        except AccessViolation:
            raise
        except Exception as exc:
            raise UDFError((t.src_id, t.dst_id), exc) from exc
    return out


class VertexCollection(Collection):
    """Vertex-keyed collection aligned slot-for-slot with a vertex store.

    Joining it back into a graph that shares the same hash indexes is a
    coordinated scan with no exchange.
    """

    def __init__(self, ctx: Context, partitioner: HashPartitioner, vparts: Sequence[VertexPartition],
                 values: Sequence[list], present: Sequence[np.ndarray]):
        self.ctx = ctx
        self.partitioner = partitioner
        self.indexes = [vp.index for vp in vparts]
        self._ids = [vp.ids for vp in vparts]
        self.values = list(values)
        self.present = list(present)
        self._parts = None

    @property
    def partitions(self):
        if self._parts is None:
            parts = []
            for ids, values, present in zip(self._ids, self.values, self.present):
                id_list = ids.tolist()
                parts.append(tuple((id_list[s], values[s]) for s in np.nonzero(present)[0].tolist()))
            self._parts = tuple(parts)
        return self._parts

    def count(self) -> int:
        return int(sum(int(p.sum()) for p in self.present))

    def shares_index(self, vparts: Sequence[VertexPartition]) -> bool:
        return len(vparts) == len(self.indexes) and all(
            a is vp.index for a, vp in zip(self.indexes, vparts))

    def to_dict(self) -> dict:
        return dict(self)


def _changed_value(old, new) -> bool:
    if old is new:
        return False
    try:
        return bool(old != new)
    except Exception:  # ambiguous comparisons (arrays) count as changed
        return True


class PropertyGraph:
    """A directed multigraph with vertex and edge attributes.

    Vertices are hash-partitioned by id; edges live in CSR-clustered edge
    partitions.  Graphs are immutable; operators return new graphs that share
    unchanged structure.  ``epoch`` identifies the structural indexes: graphs
    with equal epochs share vertex hash indexes and edge layouts.
    """

    def __init__(self, ctx: Context, vparts: list[VertexPartition], eparts: list[EdgePartition],
                 vpartitioner: HashPartitioner, epoch: int,
                 base_view: Optional[ReplicatedVertexView] = None,
                 changed: Optional[list[np.ndarray]] = None):
        self.ctx = ctx
        self.vparts = vparts
        self.eparts = eparts
        self.vpartitioner = vpartitioner
        self.epoch = epoch
        self._base_view = base_view
        # slots whose value may differ from the mirrors in base_view
        self._changed = changed if changed is not None else [vp.mask.copy() for vp in vparts]
        self._view: Optional[ReplicatedVertexView] = None
        self._local_vis: Optional[list[np.ndarray]] = None
        self._edges: Optional[Collection] = None

    # -- bookkeeping ---------------------------------------------------------

    @property
    def index_epoch(self) -> int:
        return self.epoch

    @property
    def view(self) -> Optional[ReplicatedVertexView]:
        """The replicated vertex view materialized for this graph, if any."""
        return self._view

    def num_slots(self) -> int:
        return sum(len(vp) for vp in self.vparts)

    def num_vertices(self) -> int:
        return int(sum(int(vp.mask.sum()) for vp in self.vparts))

    def changed_mask(self) -> list[np.ndarray]:
        if self._view is not None:
            return [np.zeros(len(vp), dtype=bool) for vp in self.vparts]
        return [c.copy() for c in self._changed]

    def _derive(self, vparts=None, eparts=None, diff=None, all_changed=False) -> "PropertyGraph":
        vparts = vparts if vparts is not None else self.vparts
        eparts = eparts if eparts is not None else self.eparts
        if self._view is not None:
            base = self._view
            prior = [np.zeros(len(vp), dtype=bool) for vp in self.vparts]
        else:
            base, prior = self._base_view, self._changed
        if all_changed:
            changed = [p | vp.mask for p, vp in zip(prior, vparts)]
        elif diff is not None:
            changed = [p | d for p, d in zip(prior, diff)]
        else:
            changed = prior
        return PropertyGraph(self.ctx, vparts, eparts, self.vpartitioner, self.epoch, base, changed)

    def _local_visibility(self) -> list[np.ndarray]:
        if self._local_vis is None:
            visible = [vp.ids[vp.mask] for vp in self.vparts]
            all_visible = np.sort(np.concatenate(visible)) if visible else np.zeros(0, dtype=np.uint64)
            self._local_vis = [np.isin(ep.structure.local_ids, all_visible, assume_unique=True)
                               for ep in self.eparts]
        return self._local_vis

    def _view_for(self, sides: frozenset) -> ReplicatedVertexView:
        memo = self._view
        if memo is not None and sides <= memo.sides:
            return memo
        cfg = self.ctx.config
        want = sides | (memo.sides if memo is not None else frozenset())
        if memo is not None:
            base, changed = memo, [np.zeros(len(vp), dtype=bool) for vp in self.vparts]
        else:
            base, changed = self._base_view, self._changed
        if base is None or base.epoch != self.epoch or not cfg.incremental:
            view = materialize_view(self, want)
        else:
            view = incremental_update(base, self, changed, want)
            if memo is not None:
                for new, old in zip(view.mirrors, memo.mirrors):
                    new.changed |= old.changed
                view.changed_slots = [a | b for a, b in zip(view.changed_slots, memo.changed_slots)]
        self._view = view
        return view

    # -- collection views ----------------------------------------------------

    @property
    def vertices(self) -> VertexCollection:
        """Visible ``(id, attribute)`` tuples, aligned with the vertex index."""
        return VertexCollection(self.ctx, self.vpartitioner, self.vparts,
                                [vp.values for vp in self.vparts], [vp.mask for vp in self.vparts])

    @property
    def edges(self) -> Collection:
        """Visible ``((src, dst), attribute)`` tuples, one partition per edge partition.

        Edges whose endpoint was hidden by an inner join are dropped here, on
        first request, and the result is memoized.
        """
        if self._edges is None:
            vis = self._local_visibility()

            def run(e):
                ep = self.eparts[e]
                s = ep.structure
                keep = ep.mask & vis[e][s.local_src] & vis[e][s.local_dst]
                return [((a, b), c) for a, b, c in ep.edges(np.nonzero(keep)[0].tolist())]

            self._edges = Collection(self.ctx.map(run, range(len(self.eparts))), None, self.ctx)
        return self._edges

    @property
    def triplets(self) -> Collection:
        """``((src, dst), (src attr, edge attr, dst attr))`` for every visible edge."""
        def emit(t):
            return t.as_tuple()
        parts = self._scan_triplets(emit, BOTH)
        return Collection(parts, None, self.ctx)

    # -- triplet scanning ----------------------------------------------------

    def _prepare_scan(self, spec: AccessSpec, skip: Optional[Direction],
                      scan: Optional[ScanStrategy]):
        cfg = self.ctx.config
        plan = plan_join(spec) if cfg.join_elimination else JoinPlan.THREE_WAY
        sides = plan.sides | (skip.sides if skip is not None else frozenset())
        if sides:
            view = self._view_for(frozenset(sides))
        else:
            view = None
            self.ctx.meter.record("view.ship", 0, 0)
        vis = self._local_visibility()
        strategy = scan or ScanStrategy(cfg.scan, cfg.scan_threshold)

        if skip is None:
            fractions = [1.0] * len(self.eparts)
        elif cfg.scan_scope == "partition":
            fractions = []
            for e, ep in enumerate(self.eparts):
                nvis = int(vis[e].sum())
                act = int((vis[e] & view.mirrors[e].changed).sum())
                fractions.append(act / nvis if nvis else 1.0)
        else:
            nvis = sum(int(vp.mask.sum()) for vp in self.vparts)
            act = sum(int((c & vp.mask).sum()) for c, vp in zip(view.changed_slots, self.vparts))
            fractions = [act / nvis if nvis else 1.0] * len(self.eparts)
        modes = [choose_scan(f, strategy) for f in fractions]
        return plan, view, vis, modes, fractions

    def _positions(self, e: int, vis: np.ndarray, changed: Optional[np.ndarray],
                   skip: Optional[Direction], mode: ScanMode,
                   edge_mask: Optional[np.ndarray] = None) -> np.ndarray:
        """Sorted positions of eligible edges in edge partition ``e``.

        Both scan modes return the same array; the index scan only touches the
        CSR blocks (or target-index entries) of active vertices.
        """
        ep = self.eparts[e]
        s = ep.structure
        emask = ep.mask if edge_mask is None else edge_mask
        if mode is ScanMode.SEQUENTIAL:
            keep = emask & vis[s.local_src] & vis[s.local_dst]
            if skip is Direction.OUT:
                keep &= changed[s.local_src]
            elif skip is Direction.IN:
                keep &= changed[s.local_dst]
            elif skip is Direction.BOTH:
                keep &= changed[s.local_src] | changed[s.local_dst]
            return np.nonzero(keep)[0]

        active = vis if skip is None else vis & changed
        act_idx = np.nonzero(active)[0]
        if skip is Direction.IN:
            cand = np.sort(s.in_positions(act_idx))
        elif skip is Direction.BOTH:
            cand = np.union1d(s.out_positions(act_idx), s.in_positions(act_idx))
        else:
            cand = s.out_positions(act_idx)
        if not len(cand):
            return cand
        ls, ld = s.local_src[cand], s.local_dst[cand]
        keep = emask[cand] & vis[ls] & vis[ld]
        return cand[keep]

    def _triplets(self, plan: JoinPlan, spec: AccessSpec, view, e: int, pos: np.ndarray) -> list:
        """Triplets for edge positions ``pos`` of partition ``e``; eliminated
        sides read as ``None`` (or raise, in verification mode)."""
        ep = self.eparts[e]
        s = ep.structure
        src, dst, attrs = s.src_list, s.dst_list, ep.attrs
        idx = pos.tolist()
        use_src = "src" in plan.sides
        use_dst = "dst" in plan.sides
        ma = view.mirrors[e].attrs if view is not None else None
        sa = [ma[j] for j in s.local_src[pos].tolist()] if use_src else [None] * len(idx)
        da = [ma[j] for j in s.local_dst[pos].tolist()] if use_dst else [None] * len(idx)
        if self.ctx.config.verify_access:
            return [GuardedTriplet(src[i], dst[i], a, attrs[i], b, spec)
                    for i, a, b in zip(idx, sa, da)]
        return [Triplet(src[i], dst[i], a, attrs[i], b) for i, a, b in zip(idx, sa, da)]

    def _scan_positions(self, fn: Callable, spec: AccessSpec, edge_mask: Optional[list] = None):
        """Apply ``fn`` to every visible triplet; per partition ``(positions, results)``."""
        plan, view, vis, _, _ = self._prepare_scan(spec, None, ScanStrategy("seq"))

        def run(e):
            pos = self._positions(e, vis[e], None, None, ScanMode.SEQUENTIAL,
                                  None if edge_mask is None else edge_mask[e])
            return pos, _apply_udf(fn, self._triplets(plan, spec, view, e, pos))

        return self.ctx.map(run, range(len(self.eparts)))

    def _scan_triplets(self, fn: Callable, spec: AccessSpec):
        return [out for _, out in self._scan_positions(fn, spec)]

    # -- mrTriplets ----------------------------------------------------------

    def mr_triplets(self, map_fn: Callable, reduce_fn: Callable, skip_stale=None,
                    access: Optional[AccessSpec] = None,
                    scan: Optional[ScanStrategy] = None) -> VertexCollection:
        """Map every eligible triplet to optional messages and reduce them per vertex.

        ``map_fn(triplet)`` returns ``(msg_to_src, msg_to_dst)`` with ``None`` for
        no message (or ``None`` for neither).  Vertices receiving nothing are
        absent from the result.  ``skip_stale`` (a :class:`Direction`) skips
        edges whose endpoint(s) did not change since the last view shipment.
        ``access`` declares which endpoint attributes ``map_fn`` reads; it
        defaults to the function's ``@reads`` declaration, else both sides.
        """
        skip = parse_direction(skip_stale)
        spec = access or access_of(map_fn)
        plan, view, vis, modes, fractions = self._prepare_scan(spec, skip, scan)
        nv = len(self.vparts)
        vpart = self.vpartitioner
        scanned = [0] * len(self.eparts)

        def run(e):
            changed = view.mirrors[e].changed if skip is not None else None
            pos = self._positions(e, vis[e], changed, skip, modes[e])
            scanned[e] = len(pos)
            trips = self._triplets(plan, spec, view, e, pos)
            outs = _apply_udf(map_fn, trips)
            acc: dict[int, Any] = {}
            k = None
            try:
                for t, out in zip(trips, outs):
                    if out is None:
                        continue
                    ms, md = out
                    if ms is not None:
                        k = t.src_id
                        acc[k] = reduce_fn(acc[k], ms) if k in acc else ms
                    if md is not None:
                        k = t.dst_id
                        acc[k] = reduce_fn(acc[k], md) if k in acc else md
            except Exception as exc:
                raise UDFError(k, exc) from exc
            if not acc:
                return [None] * nv
            ids = np.fromiter(acc.keys(), dtype=np.uint64, count=len(acc))
            payloads = wire.serialize_many(list(acc.values()))
            targets = vpart.assign_ids(ids)
            row = []
            for k in range(nv):
                sel = np.nonzero(targets == k)[0]
                if not len(sel):
                    row.append(None)
                    continue
                row.append((wire.encode_id_block(ids[sel], [payloads[j] for j in sel.tolist()]), len(sel)))
            return row

        outboxes = self.ctx.map(run, range(len(self.eparts)))
        inbox = self.ctx.shuffle(MESSAGE_EXCHANGE, outboxes, nv)

        def receive(k):
            vp = self.vparts[k]
            values = [None] * len(vp)
            present = [False] * len(vp)
            key = None
            try:
                for _, block in inbox[k]:
                    ids, payloads = wire.decode_id_block(block)
                    slots = vp.lookup(ids)
                    for key, s, msg in zip(ids.tolist(), slots.tolist(), wire.deserialize_many(payloads)):
                        if present[s]:
                            values[s] = reduce_fn(values[s], msg)
                        else:
                            values[s] = msg
                            present[s] = True
            except Exception as exc:
                raise UDFError(key, exc) from exc
            return values, np.array(present, dtype=bool)

        results = self.ctx.map(receive, range(nv))
        self.ctx.trace.append({
            "op": "mrTriplets", "iteration": self.ctx.meter.iteration,
            "plan": plan.value, "skip_stale": skip.value if skip else "none",
            "scan": modes[0].value if len(set(modes)) == 1 else "mixed",
            "active_fraction": fractions[0] if fractions else 1.0,
            "edges_scanned": sum(scanned),
        })
        return VertexCollection(self.ctx, self.vpartitioner, self.vparts,
                                [r[0] for r in results], [r[1] for r in results])

    # -- attribute transforms ------------------------------------------------

    def map_v(self, f: Callable[[int, Any], Any]) -> "PropertyGraph":
        """New vertex attributes ``f(id, attr)``; structure and indexes are shared."""
        def run(vp):
            values = list(vp.values)
            ids = vp.ids.tolist()
            vid = None
            try:
                for s in vp.visible_slots().tolist():
                    vid = ids[s]
                    values[s] = f(vid, values[s])
            except Exception as exc:
                raise UDFError(vid, exc) from exc
            return vp.with_values(values)
        return self._derive(vparts=self.ctx.map(run, self.vparts), all_changed=True)

    def map_e(self, f: Callable, access: Optional[AccessSpec] = None) -> "PropertyGraph":
        """New edge attributes ``f(triplet)``; vertex attributes are shipped only
        for the sides ``f`` declares."""
        spec = access or access_of(f)
        results = self._scan_positions(f, spec)
        eparts = []
        for ep, (pos, out) in zip(self.eparts, results):
            attrs = list(ep.attrs)
            for i, a in zip(pos.tolist(), out):
                attrs[i] = a
            eparts.append(ep.with_attrs(attrs))
        g = self._derive(eparts=eparts)
        g._local_vis = self._local_vis
        return g

    # -- joins ---------------------------------------------------------------

    def _align(self, t: Collection, merge: Optional[Callable], name: str):
        """Bring ``t`` to the vertex partitioning; per partition ``(values, present)``."""
        if isinstance(t, VertexCollection) and t.shares_index(self.vparts):
            return list(zip(t.values, t.present))

        nv = len(self.vparts)
        if t.partitioner == self.vpartitioner:
            local = [[(k, v, None) for k, v in part] for part in t.partitions]
        else:
            def send(part):
                ids = np.fromiter((wire.check_id(k) for k, _ in part), dtype=np.uint64, count=len(part))
                payloads = wire.serialize_many([v for _, v in part])
                targets = self.vpartitioner.assign_ids(ids)
                row = []
                for k in range(nv):
                    sel = np.nonzero(targets == k)[0]
                    row.append((wire.encode_id_block(ids[sel], [payloads[j] for j in sel.tolist()]), len(sel))
                               if len(sel) else None)
                return row
            inbox = self.ctx.shuffle(name, self.ctx.map(send, t.partitions), nv)
            local = []
            for blocks in inbox:
                rows = []
                for _, block in blocks:
                    ids, payloads = wire.decode_id_block(block)
                    rows.extend((i, None, p) for i, p in zip(ids.tolist(), payloads))
                local.append(rows)

        def receive(k):
            vp = self.vparts[k]
            values = [None] * len(vp)
            raw: list[Optional[bytes]] = [None] * len(vp)
            present = np.zeros(len(vp), dtype=bool)
            key = None
            try:
                for key, v, p in local[k]:
                    s = vp.index.get(key)
                    if s is None:
                        continue
                    if p is not None:
                        v = wire.deserialize(p)
                    if not present[s]:
                        values[s], present[s] = v, True
                        raw[s] = p
                    elif merge is not None:
                        values[s] = merge(values[s], v)
                    else:
                        p = p if p is not None else wire.serialize(v)
                        cur = raw[s] if raw[s] is not None else wire.serialize(values[s])
                        if p < cur:
                            values[s], raw[s] = v, p
                        else:
                            raw[s] = cur
            except Exception as exc:
                raise UDFError(key, exc) from exc
            return values, present

        return self.ctx.map(receive, range(nv))

    def left_join_v(self, t: Collection, merge: Optional[Callable] = None) -> "PropertyGraph":
        """Pair every visible vertex attribute with its match in ``t`` (or ``None``).

        Duplicate ids in ``t`` are combined with ``merge`` when given, otherwise
        the value with the smallest serialized form wins.
        """
        aligned = self._align(t, merge, "leftJoinV.input")

        def run(args):
            vp, (uvals, present) = args
            values = list(vp.values)
            for s in vp.visible_slots().tolist():
                values[s] = (values[s], uvals[s] if present[s] else None)
            return vp.with_values(values)

        return self._derive(vparts=self.ctx.map(run, list(zip(self.vparts, aligned))), all_changed=True)

    def inner_join_v(self, t: Collection, f: Callable[[Any, Any], Any],
                     merge: Optional[Callable] = None) -> "PropertyGraph":
        """Keep vertices present in ``t`` with attribute ``f(attr, u)``; hide the rest.

        Edges of hidden vertices disappear from triplet views immediately and
        from :attr:`edges` when that is first requested.
        """
        aligned = self._align(t, merge, "innerJoinV.input")

        def run(args):
            vp, (uvals, present) = args
            values = list(vp.values)
            ids = vp.ids.tolist()
            vid = None
            try:
                for s in np.nonzero(vp.mask & present)[0].tolist():
                    vid = ids[s]
                    values[s] = f(values[s], uvals[s])
            except Exception as exc:
                raise UDFError(vid, exc) from exc
            return VertexPartition(vp.index, vp.ids, values, vp.mask & present, vp.routing)

        return self._derive(vparts=self.ctx.map(run, list(zip(self.vparts, aligned))), all_changed=True)

    def join_vertices(self, msgs: Collection, f: Callable[[Any, Any], Any],
                      merge: Optional[Callable] = None) -> "PropertyGraph":
        """``f(attr, msg)`` for vertices with a match in ``msgs``; others unchanged.

        Only vertices whose value actually changes are marked for the next view
        shipment.
        """
        return self._join_vertices(msgs, f, merge)[0]

    def _join_vertices(self, msgs, f, merge=None):
        aligned = self._align(msgs, merge, "joinVertices.input")

        def run(args):
            vp, (uvals, present) = args
            values = list(vp.values)
            diff = np.zeros(len(vp), dtype=bool)
            ids = vp.ids.tolist()
            vid = None
            try:
                for s in np.nonzero(vp.mask & present)[0].tolist():
                    vid = ids[s]
                    old = values[s]
                    new = f(old, uvals[s])
                    values[s] = new
                    if _changed_value(old, new):
                        diff[s] = True
            except Exception as exc:
                raise UDFError(vid, exc) from exc
            return vp.with_values(values), diff

        out = self.ctx.map(run, list(zip(self.vparts, aligned)))
        diff = [d for _, d in out]
        g = self._derive(vparts=[vp for vp, _ in out], diff=diff)
        return g, int(sum(int(d.sum()) for d in diff))

    # -- structural restriction ---------------------------------------------

    def subgraph(self, vpred: Optional[Callable[[int, Any], bool]] = None,
                 epred: Optional[Callable] = None,
                 access: Optional[AccessSpec] = None) -> "PropertyGraph":
        """Hide vertices failing ``vpred`` and keep edges where ``epred`` and both
        endpoint predicates hold.  Indexes are reused through the bitmasks."""
        vparts = self.vparts
        if vpred is not None:
            def run(vp):
                ids = vp.ids.tolist()
                keep = vp.mask.copy()
                vid = None
                try:
                    for s in vp.visible_slots().tolist():
                        vid = ids[s]
                        if not vpred(vid, vp.values[s]):
                            keep[s] = False
                except Exception as exc:
                    raise UDFError(vid, exc) from exc
                return vp.with_mask(keep)
            vparts = self.ctx.map(run, self.vparts)
        masked = self._derive(vparts=vparts)

        if epred is None:
            vis = masked._local_visibility()
            emasks = [ep.mask & vis[e][ep.structure.local_src] & vis[e][ep.structure.local_dst]
                      for e, ep in enumerate(self.eparts)]
        else:
            spec = access or access_of(epred)
            results = masked._scan_positions(epred, spec)
            emasks = []
            for ep, (pos, out) in zip(self.eparts, results):
                m = np.zeros(len(ep), dtype=bool)
                m[pos[np.fromiter((bool(x) for x in out), dtype=bool, count=len(out))]] = True
                emasks.append(m)
        eparts = [ep.with_mask(m) for ep, m in zip(self.eparts, emasks)]
        routing = _route(self.ctx, eparts, self.vpartitioner, "subgraph.routing")
        vparts = [vp.with_mask(vp.mask, routing_from_inputs(vp, r)) for vp, r in zip(masked.vparts, routing)]
        g = masked._derive(vparts=vparts, eparts=eparts)
        return g

    def mask_vertices(self, keep: Iterable[int]) -> "PropertyGraph":
        """Restrict visibility to the ids in ``keep`` (bitmask AND)."""
        keep = set(keep)
        return self._derive(vparts=[vp.mask_and(keep) for vp in self.vparts])

    def reindex(self) -> "PropertyGraph":
        """Rebuild vertex indexes and edge partitions over the visible graph only."""
        vis = self._local_visibility()

        def compact_v(vp):
            slots = vp.visible_slots().tolist()
            ids = vp.ids.tolist()
            return [(ids[s], vp.values[s]) for s in slots]

        def compact_e(e):
            ep = self.eparts[e]
            s = ep.structure
            keep = ep.mask & vis[e][s.local_src] & vis[e][s.local_dst]
            return EdgePartition.build(ep.edges(np.nonzero(keep)[0].tolist()))

        eparts = self.ctx.map(compact_e, range(len(self.eparts)))
        routing = _route(self.ctx, eparts, self.vpartitioner, "reindex.routing")
        vtuples = self.ctx.map(compact_v, self.vparts)
        vparts = self.ctx.map(lambda a: build_vertex_partition(a[0], a[1]), list(zip(vtuples, routing)))
        return PropertyGraph(self.ctx, vparts, eparts, self.vpartitioner, self.ctx.next_epoch())

    def repartition_edges(self, partitioner: EdgePartitioner) -> "PropertyGraph":
        """Move visible edges to ``partitioner``'s placement and rebuild routing."""
        vis = self._local_visibility()

        def visible(e):
            ep = self.eparts[e]
            s = ep.structure
            keep = ep.mask & vis[e][s.local_src] & vis[e][s.local_dst]
            return ep.edges(np.nonzero(keep)[0].tolist())

        parts = self.ctx.map(visible, range(len(self.eparts)))
        eparts = _place_edges(self.ctx, parts, partitioner, "repartition.edges")
        routing = _route(self.ctx, eparts, self.vpartitioner, "repartition.routing")
        vparts = [VertexPartition(vp.index, vp.ids, vp.values, vp.mask, routing_from_inputs(vp, r))
                  for vp, r in zip(self.vparts, routing)]
        return PropertyGraph(self.ctx, vparts, eparts, self.vpartitioner, self.ctx.next_epoch())

    def __repr__(self):
        return (f"PropertyGraph(vertices={self.num_vertices()}, edge_partitions={len(self.eparts)}, "
                f"epoch={self.epoch})")


# -- construction -------------------------------------------------------------

def _route(ctx: Context, eparts: Sequence[EdgePartition], vpartitioner: HashPartitioner,
           name: str) -> list[list[tuple[np.ndarray, np.ndarray]]]:
    """Ship each edge partition's endpoint ids (with src/dst flags) to the vertex
    partitions that own them.  Returns ``inputs[k][e] = (ids, flags)``."""
    nv = vpartitioner.num_partitions

    def send(ep):
        ids, flags = ep.endpoint_table()
        targets = vpartitioner.assign_ids(ids)
        row = []
        for k in range(nv):
            sel = np.nonzero(targets == k)[0]
            if not len(sel):
                row.append(None)
                continue
            payloads = [bytes((f,)) for f in flags[sel].tolist()]
            row.append((wire.encode_id_block(ids[sel], payloads), len(sel)))
        return row

    inbox = ctx.shuffle(name, ctx.map(send, eparts), nv)

    def receive(k):
        inputs = [(np.zeros(0, dtype=np.uint64), np.zeros(0, dtype=np.uint8)) for _ in eparts]
        for e, block in inbox[k]:
            ids, payloads = wire.decode_id_block(block)
            inputs[e] = (ids, np.frombuffer(b"".join(payloads), dtype=np.uint8))
        return inputs

    return ctx.map(receive, range(nv))


def _place_edges(ctx: Context, parts: Sequence[list], partitioner: EdgePartitioner,
                 name: str) -> list[EdgePartition]:
    """Shuffle ``(src, dst, attr)`` lists to their assigned edge partitions and build them."""
    p = partitioner.num_partitions

    def send(edges):
        n = len(edges)
        src = np.fromiter((wire.check_id(e[0]) for e in edges), dtype=np.uint64, count=n)
        dst = np.fromiter((wire.check_id(e[1]) for e in edges), dtype=np.uint64, count=n)
        targets = partitioner.assign_arrays(src, dst)
        dst_list = dst.tolist()
        payloads = [wire.encode_varint(dst_list[i]) + wire.serialize(edges[i][2]) for i in range(n)]
        row = []
        for k in range(p):
            sel = np.nonzero(targets == k)[0]
            row.append((wire.encode_id_block(src[sel], [payloads[j] for j in sel.tolist()]), len(sel))
                       if len(sel) else None)
        return row

    inbox = ctx.shuffle(name, ctx.map(send, parts), p)

    def build(blocks):
        edges = []
        for _, block in blocks:
            ids, payloads = wire.decode_id_block(block)
            for s, raw in zip(ids.tolist(), payloads):
                d, pos = wire.decode_varint(raw, 0)
                edges.append((s, d, wire.deserialize(raw[pos:])))
        return EdgePartition.build(edges)

    return ctx.map(build, inbox)


def _edge_triples(edges: Collection) -> list[list[tuple[int, int, Any]]]:
    parts = []
    for part in edges.partitions:
        rows = []
        for key, attr in part:
            s, d = key
            rows.append((wire.check_id(s), wire.check_id(d), attr))
        parts.append(rows)
    return parts


def build_graph(vertices: Optional[Collection], edges: Collection,
                merge_v: Optional[Callable[[Any, Any], Any]] = None, default_v: Any = None,
                ctx: Optional[Context] = None,
                partitioner: Optional[EdgePartitioner] = None) -> PropertyGraph:
    """Build a consistent property graph from vertex and edge collections.

    ``edges`` holds ``((src, dst), attr)`` tuples.  Duplicate vertex ids are
    combined with ``merge_v`` (default: keep one deterministically); ids seen
    only in ``edges`` get ``default_v``.  Edges are placed by ``partitioner``,
    defaulting to the context configuration; the ``input`` kind keeps the
    edge collection's own partitions.
    """
    ctx = ctx or edges.ctx or default_context()
    cfg = ctx.config
    if partitioner is None:
        partitioner = EdgePartitioner.parse(cfg.partitioner, cfg.num_partitions, cfg.seed)
    vpartitioner = HashPartitioner(cfg.num_partitions)

    parts = _edge_triples(edges)
    if partitioner.kind is EdgeKind.INPUT:
        eparts = ctx.map(EdgePartition.build, parts)
    else:
        eparts = _place_edges(ctx, parts, partitioner, "graph.edges")

    if vertices is None:
        vertices = Collection([[] for _ in range(cfg.num_partitions)], vpartitioner, ctx)
    merge = merge_v or (lambda a, b: a)
    checked = vertices.map(lambda k, v: (wire.check_id(k), v))
    reduced = checked.reduce_by_key(merge, vpartitioner, name="graph.vertices")

    routing = _route(ctx, eparts, vpartitioner, "graph.routing")
    vparts = ctx.map(lambda a: build_vertex_partition(a[0], a[1], default_v),
                     list(zip(reduced.partitions, routing)))
    return PropertyGraph(ctx, vparts, eparts, vpartitioner, ctx.next_epoch())


# short alias
Graph = build_graph


def from_edge_list(edges: Iterable, vertices: Iterable = (), ctx: Optional[Context] = None,
                   default_v: Any = None, merge_v=None, partitioner=None) -> PropertyGraph:
    """Convenience constructor from plain Python iterables.

    ``edges`` items are ``(src, dst)`` or ``(src, dst, attr)``; missing
    attributes default to ``1.0``.
    """
    ctx = ctx or default_context()
    rows = []
    for e in edges:
        if len(e) == 2:
            rows.append(((e[0], e[1]), 1.0))
        else:
            rows.append(((e[0], e[1]), e[2]))
    ecol = Collection.from_iterable(rows, ctx=ctx)
    vcol = Collection.from_iterable(list(vertices), ctx=ctx)
    return build_graph(vcol, ecol, merge_v, default_v, ctx, partitioner)
