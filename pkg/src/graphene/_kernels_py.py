"""Pure-Python twin of ``_kernels.pyx``; used when the extension is not built."""

import pickle
import struct

import numpy as np

BACKEND = "python"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def hash64(x, seed=0):
    return _mix((x + (seed + 1) * _GOLDEN) & _MASK)


def hash64_array(arr, seed=0):
    z = np.asarray(arr, dtype=np.uint64) + np.uint64(((seed + 1) * _GOLDEN) & _MASK)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def encode_uvarint(value):
    if value < 0:
        raise OverflowError("varint value must be non-negative")
    if value > _MASK:
        raise OverflowError("varint value exceeds 64 bits")
    out = bytearray()
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)
    return bytes(out)


def decode_uvarint(buf, pos=0):
    result = 0
    shift = 0
    size = len(buf)
    while True:
        if pos >= size:
            raise ValueError("truncated varint")
        b = buf[pos]
        pos += 1
        if shift == 63 and b & 0x7E:
            raise ValueError("varint exceeds 64 bits")
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, pos
        shift += 7
        if shift > 63:
            raise ValueError("varint exceeds 64 bits")


def encode_uvarints(arr):
    out = bytearray()
    for value in np.asarray(arr, dtype=np.uint64).tolist():
        while value >= 0x80:
            out.append((value & 0x7F) | 0x80)
            value >>= 7
        out.append(value)
    return bytes(out)


def decode_uvarints(buf, pos, count):
    values = []
    for _ in range(count):
        v, pos = decode_uvarint(buf, pos)
        values.append(v)
    return np.array(values, dtype=np.uint64), pos


def encode_chunks(chunks):
    out = bytearray()
    for c in chunks:
        out += encode_uvarint(len(c))
        out += c
    return bytes(out)


def decode_chunks(buf, pos, count):
    buf = bytes(buf)
    out = []
    for _ in range(count):
        k, pos = decode_uvarint(buf, pos)
        if len(buf) - pos < k:
            raise ValueError("truncated payload")
        out.append(buf[pos:pos + k])
        pos += k
    return out, pos


# -- tagged attribute codec ---------------------------------------------------

_T_NONE, _T_FALSE, _T_TRUE, _T_INT, _T_FLOAT, _T_STR, _T_BYTES, _T_TUPLE, _T_LIST, _T_PICKLE = range(10)
_DOUBLE = struct.Struct("<d")


def _zigzag(n):
    return n << 1 if n >= 0 else ((-n) << 1) - 1


def _unzigzag(z):
    return z >> 1 if not z & 1 else -((z + 1) >> 1)


def _varint_any(n):
    # Python ints can exceed 64 bits; same 7-bit scheme, unbounded length
    out = bytearray()
    while n >= 0x80:
        out.append((n & 0x7F) | 0x80)
        n >>= 7
    out.append(n)
    return bytes(out)


def _read_varint_any(buf, pos):
    result = shift = 0
    while True:
        if pos >= len(buf):
            raise ValueError("truncated varint")
        b = buf[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, pos
        shift += 7


def _write(obj, out, custom):
    t = type(obj)
    if obj is None:
        out.append(_T_NONE)
    elif t is bool:
        out.append(_T_TRUE if obj else _T_FALSE)
    elif t is int:
        out.append(_T_INT)
        out += _varint_any(_zigzag(obj))
    elif t is float:
        out.append(_T_FLOAT)
        out += _DOUBLE.pack(obj)
    elif t is str:
        raw = obj.encode("utf-8")
        out.append(_T_STR)
        out += _varint_any(len(raw))
        out += raw
    elif t is bytes:
        out.append(_T_BYTES)
        out += _varint_any(len(obj))
        out += obj
    elif t is tuple or t is list:
        out.append(_T_TUPLE if t is tuple else _T_LIST)
        out += _varint_any(len(obj))
        for item in obj:
            _write(item, out, custom)
    elif t in custom:
        tag, enc = custom[t]
        raw = enc(obj)
        out.append(tag)
        out += _varint_any(len(raw))
        out += raw
    else:
        raw = pickle.dumps(obj, protocol=4)
        out.append(_T_PICKLE)
        out += _varint_any(len(raw))
        out += raw


def _read(buf, pos, custom):
    if pos >= len(buf):
        raise ValueError("truncated value")
    tag = buf[pos]
    pos += 1
    if tag == _T_NONE:
        return None, pos
    if tag == _T_FALSE:
        return False, pos
    if tag == _T_TRUE:
        return True, pos
    if tag == _T_INT:
        z, pos = _read_varint_any(buf, pos)
        return _unzigzag(z), pos
    if tag == _T_FLOAT:
        if pos + 8 > len(buf):
            raise ValueError("truncated float")
        return _DOUBLE.unpack_from(buf, pos)[0], pos + 8
    if tag in (_T_TUPLE, _T_LIST):
        n, pos = _read_varint_any(buf, pos)
        if n > len(buf) - pos:
            raise ValueError("truncated sequence")
        items = []
        for _ in range(n):
            item, pos = _read(buf, pos, custom)
            items.append(item)
        return (tuple(items) if tag == _T_TUPLE else items), pos
    n, pos = _read_varint_any(buf, pos)
    if pos + n > len(buf):
        raise ValueError("truncated payload")
    raw = buf[pos:pos + n]
    pos += n
    if tag == _T_STR:
        return raw.decode("utf-8"), pos
    if tag == _T_BYTES:
        return bytes(raw), pos
    if tag == _T_PICKLE:
        return pickle.loads(raw), pos
    if tag in custom:
        return custom[tag](bytes(raw)), pos
    raise ValueError(f"unknown value tag {tag}")


def dumps(obj, custom):
    out = bytearray()
    _write(obj, out, custom)
    return bytes(out)


def loads(buf, custom):
    obj, pos = _read(buf, 0, custom)
    if pos != len(buf):
        raise ValueError("trailing bytes after value")
    return obj


def dumps_many(objs, custom):
    return [dumps(o, custom) for o in objs]


def loads_many(payloads, custom):
    return [loads(p, custom) for p in payloads]
