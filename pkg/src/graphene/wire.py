"""Shuffle wire format.

Every exchange between partitions is encoded into byte blocks and decoded on
the receiving side; the meter counts the produced block lengths.

Vertex-keyed block (``encode_shuffle_block``)::

    varint count
    count x varint id delta   (ids sorted ascending, first delta against 0)
    count x (varint length, payload bytes)

Generic keyed block (``encode_keyed_block``) for collections whose keys are
arbitrary values::

    varint count
    count x (varint length, key bytes)
    count x (varint length, value bytes)

Integers use unsigned LEB128: seven value bits per byte, high bit set when
another byte follows. A 64-bit value takes at most ten bytes.
"""

from __future__ import annotations

import pickle
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .errors import CorruptBlockError

MAX_ID = (1 << 64) - 1


def encode_varint(value: int) -> bytes:
    return kernels.encode_uvarint(value)


def decode_varint(buf: bytes, pos: int = 0) -> tuple[int, int]:
    """Decode one varint at ``pos``; returns ``(value, next_pos)``."""
    try:
        return kernels.decode_uvarint(buf, pos)
    except ValueError as exc:
        raise CorruptBlockError(str(exc)) from exc


# -- attribute serialization ------------------------------------------------

_custom_by_type: dict[type, tuple[int, Callable[[Any], bytes]]] = {}
_custom_by_tag: dict[int, Callable[[bytes], Any]] = {}


def register_serializer(cls: type, tag: int, encode: Callable[[Any], bytes],
                        decode: Callable[[bytes], Any]) -> None:
    """Register a compact encoding for ``cls`` under a one-byte ``tag``.

    Tags 0-31 are reserved for built-in types.
    """
    if not 32 <= tag <= 255:
        raise ValueError("custom serializer tags must lie in [32, 255]")
    if tag in _custom_by_tag and _custom_by_type.get(cls, (None,))[0] != tag:
        raise ValueError(f"tag {tag} already registered")
    _custom_by_type[cls] = (tag, encode)
    _custom_by_tag[tag] = decode


def serialize(obj: Any) -> bytes:
    """Encode an attribute value to bytes (deterministic for built-in types)."""
    return kernels.dumps(obj, _custom_by_type)


def deserialize(raw: bytes) -> Any:
    try:
        return kernels.loads(raw, _custom_by_tag)
    except (ValueError, pickle.UnpicklingError) as exc:
        raise CorruptBlockError(str(exc)) from exc


def serialize_many(objs: list) -> list[bytes]:
    return kernels.dumps_many(objs, _custom_by_type)


def deserialize_many(payloads: list[bytes]) -> list:
    try:
        return kernels.loads_many(payloads, _custom_by_tag)
    except (ValueError, pickle.UnpicklingError) as exc:
        raise CorruptBlockError(str(exc)) from exc


# -- blocks -----------------------------------------------------------------

def check_id(vid: int) -> int:
    if type(vid) is not int:
        vid = int(vid)
    if not 0 <= vid <= MAX_ID:
        raise ValueError(f"vertex id {vid} outside the unsigned 64-bit range")
    return vid


def encode_id_column(ids: np.ndarray) -> tuple[bytes, np.ndarray]:
    """Sort ``ids`` and delta-encode them; returns (bytes, sort permutation)."""
    order = np.argsort(ids, kind="stable")
    s = ids[order]
    deltas = np.empty_like(s)
    if len(s):
        deltas[0] = s[0]
        np.subtract(s[1:], s[:-1], out=deltas[1:])
    return kernels.encode_uvarints(deltas), order


def encode_shuffle_block(tuples: Sequence[tuple[int, bytes]]) -> bytes:
    """Encode ``(vertex id, attribute bytes)`` pairs into one columnar block."""
    ids = np.fromiter((check_id(t[0]) for t in tuples), dtype=np.uint64, count=len(tuples))
    return encode_id_block(ids, [t[1] for t in tuples])


def encode_id_block(ids: np.ndarray, payloads: list[bytes]) -> bytes:
    id_bytes, order = encode_id_column(np.asarray(ids, dtype=np.uint64))
    ordered = [payloads[i] for i in order.tolist()]
    return encode_varint(len(ordered)) + id_bytes + kernels.encode_chunks(ordered)


def decode_id_block(block: bytes) -> tuple[np.ndarray, list[bytes]]:
    """Decode a vertex-keyed block into (sorted ids, payloads)."""
    try:
        count, pos = kernels.decode_uvarint(block, 0)
        deltas, pos = kernels.decode_uvarints(block, pos, count)
        payloads, pos = kernels.decode_chunks(block, pos, count)
    except ValueError as exc:
        raise CorruptBlockError(str(exc)) from exc
    if pos != len(block):
        raise CorruptBlockError("trailing bytes after block")
    ids = np.cumsum(deltas, dtype=np.uint64)
    if count > 1 and np.any(ids[1:] < ids[:-1]):
        raise CorruptBlockError("id deltas overflow 64 bits")
    return ids, payloads


def decode_shuffle_block(block: bytes) -> list[tuple[int, bytes]]:
    ids, payloads = decode_id_block(block)
    return list(zip(ids.tolist(), payloads))


def encode_keyed_block(pairs: Iterable[tuple[bytes, bytes]]) -> bytes:
    pairs = list(pairs)
    return (encode_varint(len(pairs))
            + kernels.encode_chunks([k for k, _ in pairs])
            + kernels.encode_chunks([v for _, v in pairs]))


def decode_keyed_block(block: bytes) -> list[tuple[bytes, bytes]]:
    try:
        count, pos = kernels.decode_uvarint(block, 0)
        keys, pos = kernels.decode_chunks(block, pos, count)
        values, pos = kernels.decode_chunks(block, pos, count)
    except ValueError as exc:
        raise CorruptBlockError(str(exc)) from exc
    if pos != len(block):
        raise CorruptBlockError("trailing bytes after block")
    return list(zip(keys, values))
