"""Edge-list and title-file readers."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Optional

from . import wire
from .collection import Collection
from .context import Context, default_context
from .errors import DataError

_SPLIT = re.compile(r"[,\s]+")


def parse_edge_lines(lines, strict: bool = True):
    """Parse ``src dst [weight]`` lines into ``((src, dst), weight)`` pairs.

    Fields may be separated by whitespace or commas; ``#`` starts a comment
    line.  Returns ``(pairs, bad)`` where ``bad`` lists ``(line number,
    reason)``.  In strict mode any bad line raises :class:`DataError`.
    """
    pairs, bad = [], []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        try:
            if len(fields) not in (2, 3):
                raise ValueError(f"expected 2 or 3 fields, got {len(fields)}")
            src, dst = wire.check_id(int(fields[0])), wire.check_id(int(fields[1]))
            weight = float(fields[2]) if len(fields) == 3 else 1.0
        except ValueError as exc:
            bad.append((lineno, str(exc)))
            continue
        pairs.append(((src, dst), weight))
    if bad and strict:
        shown = "; ".join(f"line {n}: {why}" for n, why in bad[:5])
        raise DataError(f"{len(bad)} malformed edge line(s): {shown}", bad)
    return pairs, bad


def load_edges(path, strict: bool = True, ctx: Optional[Context] = None,
               num_partitions: Optional[int] = None) -> Collection:
    """Read an edge list into a collection of ``((src, dst), weight)`` tuples."""
    ctx = ctx or default_context()
    try:
        with open(path, encoding="utf-8") as fh:
            pairs, _ = parse_edge_lines(fh, strict)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return Collection.from_iterable(pairs, num_partitions, ctx)


def load_titles(path, ctx: Optional[Context] = None) -> Collection:
    """Read ``id<TAB or space>title`` lines into ``(id, title)`` tuples."""
    ctx = ctx or default_context()
    rows, bad = [], []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, title = line.partition("\t") if "\t" in line else line.partition(" ")
        try:
            rows.append((wire.check_id(int(head)), title.strip()))
        except ValueError as exc:
            bad.append((lineno, str(exc)))
    if bad:
        raise DataError(f"{len(bad)} malformed title line(s), first at line {bad[0][0]}", bad)
    return Collection.from_iterable(rows, ctx=ctx)
