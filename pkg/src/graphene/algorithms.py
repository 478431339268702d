"""Graph algorithms composed from the core operators: Pregel, PageRank,
connected components, coarsening and the senior-neighbor count."""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .collection import Collection
from .graph import PropertyGraph, VertexCollection, build_graph
from .plan import DST_ONLY, NEITHER, SRC_ONLY, AccessSpec, Direction, parse_direction, reads

DEFAULT_RESET = 0.15


@dataclass
class PregelProgram:
    """The three UDFs of a Pregel computation plus loop controls.

    ``send(triplet)`` returns ``(msg_to_src, msg_to_dst)`` (either may be
    ``None``), ``gather`` combines messages and ``vprog(attr, msg)`` runs only
    on vertices that received one.  ``halted(attr)`` reports a vote to halt;
    without it every vertex stays live and the loop ends when a superstep
    sends nothing.
    """

    vprog: Callable[[Any, Any], Any]
    send: Callable
    gather: Callable[[Any, Any], Any]
    halted: Optional[Callable[[Any], bool]] = None
    skip_stale: Optional[Direction] = Direction.OUT
    max_iterations: int = 100
    access: Optional[AccessSpec] = None


@dataclass
class SuperstepStats:
    iteration: int
    messages: int
    changed: int
    live: int


@dataclass
class PregelResult:
    graph: PropertyGraph
    supersteps: list[SuperstepStats] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.supersteps)


def _live(g: PropertyGraph, halted) -> int:
    if halted is None:
        return g.num_vertices()
    return g.vertices.filter(lambda _, v: not halted(v)).count()


def pregel(g: PropertyGraph, prog: PregelProgram) -> PregelResult:
    """Run ``prog`` to convergence.

    Each superstep computes messages with mrTriplets (restricted by
    ``prog.skip_stale`` to edges around changed vertices), applies ``vprog``
    to the receivers and counts live vertices.  Superstep ``k`` is metered as
    iteration ``k``.
    """
    ctx = g.ctx
    skip = parse_direction(prog.skip_stale)
    result = PregelResult(g)
    live = _live(g, prog.halted)
    k = 0
    while live > 0 and k < prog.max_iterations:
        k += 1
        with ctx.meter.at_iteration(k):
            msgs = g.mr_triplets(prog.send, prog.gather, skip_stale=skip, access=prog.access)
            n_msgs = msgs.count()
            if n_msgs == 0:
                result.supersteps.append(SuperstepStats(k, 0, 0, live))
                break
            g, n_changed = g._join_vertices(msgs, prog.vprog)
            live = _live(g, prog.halted)
        ctx.trace.append({"op": "pregel", "iteration": k, "messages": n_msgs,
                          "changed": n_changed, "live": live})
        result.supersteps.append(SuperstepStats(k, n_msgs, n_changed, live))
    result.graph = g
    return result


# -- degrees and PageRank --------------------------------------------------------

def out_degrees(g: PropertyGraph) -> VertexCollection:
    """Out-degree per vertex (vertices without out-edges are absent).  Reads no
    vertex attributes, so no vertex data is shipped."""
    return g.mr_triplets(_one_to_src, operator.add, access=NEITHER)


def in_degrees(g: PropertyGraph) -> VertexCollection:
    return g.mr_triplets(_one_to_dst, operator.add, access=NEITHER)


def _one_to_src(t):
    return 1, None


def _one_to_dst(t):
    return None, 1


@reads(src=True)
def _pr_send(t):
    rank, outdeg = t.src_attr
    return None, rank / outdeg


def page_rank(g: PropertyGraph, iterations: int = 20, reset_prob: float = DEFAULT_RESET,
              tolerance: Optional[float] = None, skip_stale=Direction.OUT,
              access: Optional[AccessSpec] = None,
              max_iterations: int = 100) -> VertexCollection:
    """PageRank ranks as a vertex collection.

    Fixed-iteration mode (``tolerance=None``) starts every rank at 1.0 and
    applies ``rank = reset + (1 - reset) * sum(rank(u) / outdeg(u))`` to all
    vertices ``iterations`` times; dangling vertices send nothing.  With a
    tolerance the delta-propagating Pregel form runs until every change is
    below it.  ``access`` overrides the message UDF's declared access (used
    to compare join plans).
    """
    if not 0.0 < reset_prob < 1.0:
        raise ValueError("reset_prob must lie in (0, 1)")
    if tolerance is not None:
        return _page_rank_delta(g, reset_prob, tolerance, skip_stale, max_iterations).vertices
    if iterations < 1:
        raise ValueError("iterations must be positive")
    ctx = g.ctx
    damp = 1.0 - reset_prob
    deg = out_degrees(g)
    state = g.left_join_v(deg).map_v(lambda _, v: (1.0, v[1] or 0))
    for k in range(1, iterations + 1):
        with ctx.meter.at_iteration(k):
            msgs = state.mr_triplets(_pr_send, operator.add, access=access)
            state = state.left_join_v(msgs).map_v(
                lambda _, v: (reset_prob + damp * (v[1] or 0.0), v[0][1]))
    return state.map_v(lambda _, v: v[0]).vertices


def _page_rank_delta(g, reset_prob, tol, skip_stale, max_iterations) -> PropertyGraph:
    damp = 1.0 - reset_prob

    @reads(src=True)
    def send(t):
        _, delta, outdeg = t.src_attr
        if outdeg == 0 or delta < tol:
            return None
        # the 0.0 to the source clears its pending delta once it has been sent
        return 0.0, delta / outdeg

    def vprog(v, s):
        d = damp * s
        return (v[0] + d, d, v[2])

    deg = out_degrees(g)
    state = g.left_join_v(deg).map_v(lambda _, v: (reset_prob, reset_prob, v[1] or 0))
    prog = PregelProgram(vprog, send, operator.add, halted=lambda v: abs(v[1]) < tol,
                         skip_stale=skip_stale, max_iterations=max_iterations)
    return pregel(state, prog).graph.map_v(lambda _, v: v[0])


# -- connected components --------------------------------------------------------

def _cc_vprog(v, m):
    return v if v <= m else m


def _cc_send(t):
    if t.src_attr > t.dst_attr:
        return t.dst_attr, None
    if t.src_attr < t.dst_attr:
        return None, t.src_attr
    return None


def _symmetrized(g: PropertyGraph) -> PropertyGraph:
    parts = [[e for (s, d), a in part for e in (((s, d), a), ((d, s), a))]
             for part in g.edges.partitions]
    return build_graph(g.vertices, Collection(parts, None, g.ctx), ctx=g.ctx)


def connected_components_run(g: PropertyGraph, skip_stale=Direction.BOTH,
                             max_iterations: int = 10_000) -> PregelResult:
    """Weakly connected components; label = smallest vertex id of the component.

    Messages flow along each edge toward the endpoint with the larger label.
    A one-sided ``skip_stale`` (``out`` or ``in``) would miss updates that
    travel against edge direction, so those runs use a graph holding every
    edge in both directions.
    """
    skip = parse_direction(skip_stale)
    work = _symmetrized(g) if skip in (Direction.OUT, Direction.IN) else g
    work = work.map_v(lambda vid, _: vid)
    prog = PregelProgram(_cc_vprog, _cc_send, min, skip_stale=skip, max_iterations=max_iterations)
    res = pregel(work, prog)
    if work.epoch != g.epoch:
        res.graph = g.map_v(lambda vid, _: vid).join_vertices(res.graph.vertices, lambda _, c: c)
    return res


def connected_components(g: PropertyGraph, skip_stale=Direction.BOTH,
                         max_iterations: int = 10_000) -> PropertyGraph:
    return connected_components_run(g, skip_stale, max_iterations).graph


# -- coarsening ----------------------------------------------------------------

def coarsen(g: PropertyGraph, pred: Callable, reduce: Callable[[Any, Any], Any]) -> PropertyGraph:
    """Merge vertices joined by edges satisfying ``pred`` into super-vertices.

    Each super-vertex takes the smallest id of its group and the ``reduce``
    fold of the members' attributes.  Edges failing ``pred`` are relinked
    between super-vertices; parallel edges are kept.
    """
    sub_g = g.subgraph(epred=pred)
    cc = connected_components(sub_g).vertices
    super_verts = (g.vertices.left_join(cc)
                   .map(lambda vid, pc: (pc[1], pc[0]))
                   .reduce_by_key(reduce))

    def inv(t):
        return not pred(t)
    if hasattr(pred, "access_spec"):
        inv.access_spec = pred.access_spec
    inv_g = g.subgraph(epred=inv)
    remaining = inv_g.left_join_v(cc).triplets.map(
        lambda key, t: ((t[0][1], t[2][1]), t[1]))
    return build_graph(super_verts, remaining, ctx=g.ctx)


# -- senior neighbors ------------------------------------------------------------

def senior_neighbor_count(g: PropertyGraph) -> VertexCollection:
    """Number of strictly older neighbors per vertex (vertex attribute = age).

    Vertices with no older neighbor are absent.
    """
    def send(t):
        if t.src_attr < t.dst_attr:
            return 1, None
        if t.dst_attr < t.src_attr:
            return None, 1
        return None
    return g.mr_triplets(send, operator.add)


__all__ = ["PregelProgram", "PregelResult", "SuperstepStats", "pregel", "out_degrees",
           "in_degrees", "page_rank", "connected_components", "connected_components_run",
           "coarsen", "senior_neighbor_count", "DEFAULT_RESET", "SRC_ONLY", "DST_ONLY"]
