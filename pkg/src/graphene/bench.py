"""Benchmarks: compiled vs pure-Python kernels, and optimization on/off runs."""

from __future__ import annotations

import json
import random
import time
from typing import Callable

import numpy as np

from . import _kernels_py, kernels


def _best(fn: Callable[[], object], repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(n: int, seed: int):
    rng = np.random.default_rng(seed)
    ids = np.sort(rng.integers(0, 2**40, size=n, dtype=np.uint64))
    deltas = np.diff(ids, prepend=np.uint64(0)).astype(np.uint64)
    chunks = [bytes(rng.integers(0, 256, size=int(k), dtype=np.uint8)) for k in rng.integers(0, 24, size=n)]
    # vertex attributes as algorithms carry them: (rank, degree) pairs
    values = [(float(r), int(d)) for r, d in zip(rng.random(n), rng.integers(0, 1000, size=n))]

    def cases(mod):
        enc = mod.encode_uvarints(deltas)
        blob = mod.encode_chunks(chunks)
        packed = mod.dumps_many(values, {})
        return {
            "hash64_array": lambda: mod.hash64_array(ids, 7),
            "encode_uvarints": lambda: mod.encode_uvarints(deltas),
            "decode_uvarints": lambda: mod.decode_uvarints(enc, 0, len(deltas)),
            "encode_chunks": lambda: mod.encode_chunks(chunks),
            "decode_chunks": lambda: mod.decode_chunks(blob, 0, len(chunks)),
            "dumps_many": lambda: mod.dumps_many(values, {}),
            "loads_many": lambda: mod.loads_many(packed, {}),
        }
    return cases


def bench_kernels(n: int = 100_000, repeat: int = 3, seed: int = 42) -> list[dict]:
    """Time every kernel under each available backend."""
    cases = kernel_cases(n, seed)
    mods = [m for m in kernels.backends() if m is not _kernels_py] + [_kernels_py]
    rows = []
    timings: dict[str, dict[str, float]] = {}
    for mod in mods:
        for name, fn in cases(mod).items():
            timings.setdefault(name, {})[mod.BACKEND] = _best(fn, repeat)
    for name, by_backend in timings.items():
        row = {"kernel": name, "n": n, **{f"{b}_s": t for b, t in by_backend.items()}}
        if "cython" in by_backend and by_backend["cython"] > 0:
            row["speedup"] = by_backend["python"] / by_backend["cython"]
        rows.append(row)
    return rows


def random_edges(n: int, m: int, seed: int) -> list[tuple[int, int]]:
    rnd = random.Random(seed)
    return [(rnd.randrange(n), rnd.randrange(n)) for _ in range(m)]


def bench_optimizations(n: int = 2000, m: int = 20000, seed: int = 42, workers: int = 1) -> list[dict]:
    """Shipped vertex-view bytes and wall time with each optimization toggled."""
    from .algorithms import connected_components, page_rank
    from .context import Context
    from .graph import from_edge_list

    edges = random_edges(n, m, seed)
    rows = []
    runs = [
        ("pagerank-20", "join_elimination", lambda g: page_rank(g, 20)),
        ("cc", "incremental", lambda g: connected_components(g)),
    ]
    for algo, flag, run in runs:
        for on in (True, False):
            ctx = Context(workers=workers, partitioner="hash2d", **{flag: on})
            g = from_edge_list(edges, ctx=ctx, default_v=0)
            t0 = time.perf_counter()
            run(g)
            rows.append({"algorithm": algo, "flag": flag, "enabled": on,
                         "seconds": time.perf_counter() - t0,
                         "view_bytes": ctx.meter.total_bytes("view.ship"),
                         "total_bytes": ctx.meter.total_bytes()})
            ctx.close()
    for mode in ("seq", "index", "auto"):
        ctx = Context(workers=workers, partitioner="hash2d", scan=mode)
        g = from_edge_list(edges, ctx=ctx, default_v=0)
        t0 = time.perf_counter()
        connected_components(g)
        rows.append({"algorithm": "cc", "flag": "scan", "enabled": mode,
                     "seconds": time.perf_counter() - t0,
                     "edges_scanned": sum(ev["edges_scanned"] for ev in ctx.trace
                                          if ev.get("op") == "mrTriplets")})
        ctx.close()
    return rows


def run(vertices: int = 2000, edges: int = 20000, repeat: int = 3, seed: int = 42,
        as_json: bool = False) -> int:
    kern = bench_kernels(max(edges, 1000) * 5, repeat, seed)
    opt = bench_optimizations(vertices, edges, seed)
    if as_json:
        print(json.dumps({"kernels": kern, "optimizations": opt}, indent=2))
        return 0
    print("kernel            n        " + "  ".join(f"{b:>10}" for b in ("cython_s", "python_s", "speedup")))
    for r in kern:
        print(f"{r['kernel']:<17} {r['n']:<8} {r.get('cython_s', float('nan')):>10.5f}  "
              f"{r['python_s']:>10.5f}  {r.get('speedup', float('nan')):>10.1f}")
    print()
    for r in opt:
        extra = (f"view_bytes={r['view_bytes']}" if "view_bytes" in r
                 else f"edges_scanned={r['edges_scanned']}")
        print(f"{r['algorithm']:<12} {r['flag']:<17} {str(r['enabled']):<6} {r['seconds']:8.3f}s  {extra}")
    return 0
