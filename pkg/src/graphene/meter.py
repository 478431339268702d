"""Communication metering: bytes and tuples per named exchange and iteration."""

from __future__ import annotations

import csv
import json
import threading
from contextlib import contextmanager
from pathlib import Path

CSV_HEADER = ("exchange", "iteration", "bytes", "tuples")


class CommMeter:
    """Accumulates shipped bytes per ``(exchange, iteration)``.

    Only sums are kept, so concurrent ``record`` calls commute.  Rows appear
    in the order their key was first recorded.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._rows: dict[tuple[str, int], list[int]] = {}
        self.iteration = 0

    def record(self, exchange: str, nbytes: int, ntuples: int, iteration: int | None = None):
        key = (exchange, self.iteration if iteration is None else iteration)
        with self._lock:
            row = self._rows.setdefault(key, [0, 0])
            row[0] += nbytes
            row[1] += ntuples

    @contextmanager
    def at_iteration(self, iteration: int):
        prev, self.iteration = self.iteration, iteration
        try:
            yield self
        finally:
            self.iteration = prev

    def rows(self) -> list[tuple[str, int, int, int]]:
        with self._lock:
            return [(ex, it, b, t) for (ex, it), (b, t) in self._rows.items()]

    def exchanges(self) -> list[str]:
        return list(dict.fromkeys(ex for ex, *_ in self.rows()))

    def total_bytes(self, exchange: str | None = None) -> int:
        return sum(b for ex, _, b, _ in self.rows() if exchange is None or ex == exchange)

    def total_tuples(self, exchange: str | None = None) -> int:
        return sum(t for ex, _, _, t in self.rows() if exchange is None or ex == exchange)

    def series(self, exchange: str) -> list[tuple[int, int, int]]:
        """``(iteration, bytes, tuples)`` rows of one exchange, by iteration."""
        return sorted((it, b, t) for ex, it, b, t in self.rows() if ex == exchange)

    def reset(self):
        with self._lock:
            self._rows.clear()

    def to_records(self) -> list[dict]:
        return [dict(zip(CSV_HEADER, row)) for row in self.rows()]

    def export(self, path, fmt: str = "csv"):
        """Write all rows to ``path`` as ``csv`` or ``json``."""
        path = Path(path)
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(CSV_HEADER)
                writer.writerows(self.rows())
        elif fmt == "json":
            path.write_text(json.dumps(self.to_records(), indent=2) + "\n")
        else:
            raise ValueError(f"unknown metrics format {fmt!r}")


def export_metrics(meter: CommMeter, path, fmt: str = "csv"):
    meter.export(path, fmt)
