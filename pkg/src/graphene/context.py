"""Engine configuration, worker pool and the in-process exchange."""

from __future__ import annotations

import itertools
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

from .errors import ConfigError
from .meter import CommMeter

SCAN_MODES = ("auto", "seq", "index")
SCAN_SCOPES = ("global", "partition")


@dataclass
class EngineConfig:
    num_partitions: int = 4
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    partitioner: str = "input"
    seed: int = 42
    incremental: bool = True
    join_elimination: bool = True
    scan: str = "auto"
    scan_threshold: float = 0.8
    scan_scope: str = "global"
    verify_access: bool = False
    # block -> wire bytes and back; identity when unset
    compress: Optional[Callable[[bytes], bytes]] = None
    decompress: Optional[Callable[[bytes], bytes]] = None

    def __post_init__(self):
        if self.num_partitions < 1:
            raise ConfigError("num_partitions must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.scan not in SCAN_MODES:
            raise ConfigError(f"scan must be one of {SCAN_MODES}")
        if self.scan_scope not in SCAN_SCOPES:
            raise ConfigError(f"scan_scope must be one of {SCAN_SCOPES}")
        if not 0.0 <= self.scan_threshold <= 1.0:
            raise ConfigError("scan_threshold must lie in [0, 1]")


class Context:
    """Holds the configuration, communication meter and worker pool.

    Collections and graphs keep a reference to the context that built them.
    Per-partition tasks run on the pool; results always come back in
    partition order, so output never depends on the pool size.
    """

    def __init__(self, config: EngineConfig | None = None, **overrides):
        config = config or EngineConfig()
        self.config = replace(config, **overrides) if overrides else config
        self.meter = CommMeter()
        self.trace: list[dict] = []
        self._epochs = itertools.count(1)
        self._epoch_lock = threading.Lock()
        self._pool: ThreadPoolExecutor | None = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def next_epoch(self) -> int:
        with self._epoch_lock:
            return next(self._epochs)

    def map(self, fn: Callable, items: Iterable) -> list:
        """Apply ``fn`` to every item on the worker pool (barrier at return)."""
        items = list(items)
        if self.config.workers == 1 or len(items) <= 1:
            return [fn(x) for x in items]
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.config.workers,
                                            thread_name_prefix="graphene")
        return list(self._pool.map(fn, items))

    def shuffle(self, name: str, outboxes: Sequence[Sequence[tuple[bytes, int] | None]],
                num_targets: int) -> list[list[tuple[int, bytes]]]:
        """Exchange encoded blocks between partitions.

        ``outboxes[src][dst]`` is ``(block, tuple_count)`` or ``None``.  Returns
        ``inbox[dst]``: ``(src, block)`` pairs in source-partition order.  Metered bytes are the
        wire lengths after the compression hook.
        """
        compress = self.config.compress
        decompress = self.config.decompress
        inbox: list[list[tuple[int, bytes]]] = [[] for _ in range(num_targets)]
        nbytes = ntuples = 0
        for src, row in enumerate(outboxes):
            for dst, item in enumerate(row):
                if item is None:
                    continue
                block, count = item
                wire = compress(block) if compress else block
                nbytes += len(wire)
                ntuples += count
                inbox[dst].append((src, decompress(wire) if decompress else wire))
        self.meter.record(name, nbytes, ntuples)
        return inbox


_default: Context | None = None


def default_context() -> Context:
    global _default
    if _default is None:
        _default = Context()
    return _default


def set_default_context(ctx: Context | None) -> None:
    global _default
    _default = ctx
