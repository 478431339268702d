"""Reference implementations used as test oracles.

Each is written directly from the definition (dense matrices, union-find,
nested loops) and shares no code with the engine.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict

import numpy as np


def random_graph(seed: int, n: int, m: int, id_space: int | None = None, attr=None):
    """``(vertex ids, edges)``; edges are ``(src, dst, attr)`` with possible
    duplicates and self-loops."""
    rnd = random.Random(seed)
    space = id_space or n
    ids = sorted(rnd.sample(range(space), n)) if space > n else list(range(n))
    edges = []
    for _ in range(m):
        s, d = rnd.choice(ids), rnd.choice(ids)
        edges.append((s, d, attr(rnd) if attr else 1.0))
    return ids, edges


def dense_pagerank(ids, edges, iterations: int, reset: float = 0.15) -> dict:
    """Power iteration with PR_0 = 1 and PR_{k+1} = reset + (1-reset) * A^T (PR / outdeg)."""
    pos = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    A = np.zeros((n, n))
    for s, d, _ in edges:
        A[pos[s], pos[d]] += 1.0
    outdeg = A.sum(axis=1)
    W = np.divide(A, outdeg[:, None], out=np.zeros_like(A), where=outdeg[:, None] > 0)
    pr = np.ones(n)
    for _ in range(iterations):
        pr = reset + (1.0 - reset) * (W.T @ pr)
    return {v: float(pr[pos[v]]) for v in ids}


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def components(ids, pairs) -> dict:
    """Label each id with the minimum id of its weak component."""
    uf = UnionFind(ids)
    for s, d in pairs:
        uf.union(s, d)
    groups = defaultdict(list)
    for v in ids:
        groups[uf.find(v)].append(v)
    return {v: min(g) for g in groups.values() for v in g}


def mr_triplets_join(vertices: list, edges: list, map_fn, reduce_fn) -> Counter:
    """Nested-loop three-way join then group-by; returns a multiset of (id, msg).

    ``vertices`` is a list of (id, attr) rows; ``edges`` of (src, dst, attr).
    """
    class T:
        pass
    msgs = []
    for s, d, a in edges:
        for vs, sattr in vertices:
            if vs != s:
                continue
            for vd, dattr in vertices:
                if vd != d:
                    continue
                t = T()
                t.src_id, t.dst_id, t.src_attr, t.attr, t.dst_attr = s, d, sattr, a, dattr
                out = map_fn(t)
                if out is None:
                    continue
                if out[0] is not None:
                    msgs.append((s, out[0]))
                if out[1] is not None:
                    msgs.append((d, out[1]))
    grouped: dict = {}
    for k, m in msgs:
        grouped[k] = reduce_fn(grouped[k], m) if k in grouped else m
    return Counter(grouped.items())


def contraction(vertices: dict, edges: list, pred, reduce_fn):
    """Contract predicate edges with union-find.  Returns (super vertices dict,
    Counter of relinked non-predicate edges)."""
    uf = UnionFind(vertices)
    keep = []
    for s, d, a in edges:
        if pred(s, d, a, vertices[s], vertices[d]):
            uf.union(s, d)
        else:
            keep.append((s, d, a))
    groups = defaultdict(list)
    for v in sorted(vertices):
        groups[uf.find(v)].append(v)
    label = {}
    supers = {}
    for members in groups.values():
        root = min(members)
        acc = None
        for i, v in enumerate(members):
            label[v] = root
            acc = vertices[v] if i == 0 else reduce_fn(acc, vertices[v])
        supers[root] = acc
    relinked = Counter(((label[s], label[d]), a) for s, d, a in keep)
    return supers, relinked


def senior_tally(ages: dict, edges) -> dict:
    out = Counter()
    for s, d, _ in edges:
        if ages[s] < ages[d]:
            out[s] += 1
        elif ages[d] < ages[s]:
            out[d] += 1
    return dict(out)


def leb128(value: int) -> bytes:
    """Textbook unsigned LEB128."""
    groups = []
    while True:
        value, low = divmod(value, 128)
        groups.append(low)
        if value == 0:
            break
    return bytes([g | 0x80 for g in groups[:-1]] + [groups[-1]])
