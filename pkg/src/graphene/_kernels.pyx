# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: 64-bit mixing hash, LEB128 varint columns and the
tagged attribute codec."""

import pickle
import sys

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint8_t
from libc.string cimport memcpy

if sys.byteorder != "little":
    raise ImportError("compiled kernels assume a little-endian host")

cnp.import_array()

BACKEND = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def hash64(x, seed=0):
    cdef uint64_t v = <uint64_t>x
    cdef uint64_t s = <uint64_t>seed
    return _mix(v + (s + 1) * GOLDEN)


def hash64_array(cnp.ndarray arr, seed=0):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] a = np.ascontiguousarray(arr, dtype=np.uint64)
    cdef Py_ssize_t n = a.shape[0], i
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(n, dtype=np.uint64)
    cdef uint64_t add = (<uint64_t>seed + 1) * GOLDEN
    with nogil:
        for i in range(n):
            out[i] = _mix(a[i] + add)
    return out


cdef inline Py_ssize_t _put(uint8_t* buf, Py_ssize_t pos, uint64_t v) nogil:
    while v >= 0x80:
        buf[pos] = <uint8_t>((v & 0x7F) | 0x80)
        v >>= 7
        pos += 1
    buf[pos] = <uint8_t>v
    return pos + 1


def encode_uvarint(value):
    if value < 0:
        raise OverflowError("varint value must be non-negative")
    cdef uint64_t v = <uint64_t>value
    cdef uint8_t tmp[10]
    cdef Py_ssize_t n = _put(tmp, 0, v)
    return bytes(tmp[:n])


cdef inline uint64_t _get(const uint8_t* buf, Py_ssize_t size, Py_ssize_t* pos) except? 0:
    cdef uint64_t result = 0
    cdef unsigned int shift = 0
    cdef uint8_t b
    cdef Py_ssize_t p = pos[0]
    while True:
        if p >= size:
            raise ValueError("truncated varint")
        b = buf[p]
        p += 1
        if shift == 63 and (b & 0x7E):
            raise ValueError("varint exceeds 64 bits")
        result |= (<uint64_t>(b & 0x7F)) << shift
        if not (b & 0x80):
            break
        shift += 7
        if shift > 63:
            raise ValueError("varint exceeds 64 bits")
    pos[0] = p
    return result


def decode_uvarint(const uint8_t[::1] buf, Py_ssize_t pos=0):
    cdef Py_ssize_t p = pos
    cdef uint64_t v = _get(&buf[0] if buf.shape[0] else NULL, buf.shape[0], &p)
    return v, p


def encode_uvarints(cnp.ndarray arr):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] a = np.ascontiguousarray(arr, dtype=np.uint64)
    cdef Py_ssize_t n = a.shape[0], i, pos = 0
    cdef bytearray out = bytearray(n * 10)
    cdef uint8_t* buf = out
    with nogil:
        for i in range(n):
            pos = _put(buf, pos, a[i])
    del out[pos:]
    return bytes(out)


def decode_uvarints(const uint8_t[::1] buf, Py_ssize_t pos, Py_ssize_t count):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(count, dtype=np.uint64)
    cdef Py_ssize_t i, size = buf.shape[0]
    cdef Py_ssize_t p = pos
    cdef const uint8_t* base = &buf[0] if size else NULL
    for i in range(count):
        out[i] = _get(base, size, &p)
    return out, p


def encode_chunks(list chunks):
    cdef Py_ssize_t total = 0, pos = 0, k
    cdef bytes c
    for c in chunks:
        total += len(c) + 10
    cdef bytearray out = bytearray(total)
    cdef uint8_t* buf = out
    for c in chunks:
        k = len(c)
        pos = _put(buf, pos, <uint64_t>k)
        out[pos:pos + k] = c
        pos += k
    del out[pos:]
    return bytes(out)


def decode_chunks(const uint8_t[::1] buf, Py_ssize_t pos, Py_ssize_t count):
    cdef Py_ssize_t i, size = buf.shape[0], p = pos
    cdef uint64_t k
    cdef const uint8_t* base = &buf[0] if size else NULL
    cdef list out = []
    for i in range(count):
        k = _get(base, size, &p)
        if <uint64_t>(size - p) < k:
            raise ValueError("truncated payload")
        out.append(bytes(buf[p:p + <Py_ssize_t>k]))
        p += <Py_ssize_t>k
    return out, p


# -- tagged attribute codec ---------------------------------------------------

cdef enum:
    T_NONE = 0
    T_FALSE = 1
    T_TRUE = 2
    T_INT = 3
    T_FLOAT = 4
    T_STR = 5
    T_BYTES = 6
    T_TUPLE = 7
    T_LIST = 8
    T_PICKLE = 9


cdef int _wvar(bytearray out, object n) except -1:
    cdef uint8_t tmp[10]
    cdef Py_ssize_t k
    if n <= 0xFFFFFFFFFFFFFFFF:
        k = _put(tmp, 0, <uint64_t>n)
        out += (<char*>tmp)[:k]
        return 0
    while n >= 0x80:
        out.append((n & 0x7F) | 0x80)
        n >>= 7
    out.append(n)
    return 0


cdef int _w(object obj, bytearray out, dict custom) except -1:
    cdef type t = type(obj)
    cdef double d
    cdef bytes raw
    if obj is None:
        out.append(T_NONE)
    elif t is bool:
        out.append(T_TRUE if obj else T_FALSE)
    elif t is int:
        out.append(T_INT)
        _wvar(out, obj << 1 if obj >= 0 else ((-obj) << 1) - 1)
    elif t is float:
        d = obj
        out.append(T_FLOAT)
        out += (<char*>&d)[:8]
    elif t is str:
        raw = (<str>obj).encode("utf-8")
        out.append(T_STR)
        _wvar(out, len(raw))
        out += raw
    elif t is bytes:
        out.append(T_BYTES)
        _wvar(out, len(<bytes>obj))
        out += <bytes>obj
    elif t is tuple or t is list:
        out.append(T_TUPLE if t is tuple else T_LIST)
        _wvar(out, len(obj))
        for item in obj:
            _w(item, out, custom)
    else:
        entry = custom.get(t)
        if entry is not None:
            tag, enc = entry
            raw = enc(obj)
            out.append(tag)
        else:
            raw = pickle.dumps(obj, protocol=4)
            out.append(T_PICKLE)
        _wvar(out, len(raw))
        out += raw
    return 0


def dumps(obj, dict custom):
    """Encode ``obj``; ``custom`` maps type -> (tag, encoder)."""
    cdef bytearray out = bytearray()
    _w(obj, out, custom)
    return bytes(out)


cdef object _get_any(const uint8_t* buf, Py_ssize_t size, Py_ssize_t* pos):
    # unbounded varint: fast path below 63 bits, Python ints beyond
    cdef uint64_t acc = 0
    cdef unsigned int shift = 0
    cdef Py_ssize_t p = pos[0]
    cdef uint8_t b
    while shift < 63:
        if p >= size:
            raise ValueError("truncated varint")
        b = buf[p]
        p += 1
        acc |= (<uint64_t>(b & 0x7F)) << shift
        if not (b & 0x80):
            pos[0] = p
            return acc
        shift += 7
    result = acc
    while True:
        if p >= size:
            raise ValueError("truncated varint")
        b = buf[p]
        p += 1
        result |= (<object>(b & 0x7F)) << shift
        if not (b & 0x80):
            pos[0] = p
            return result
        shift += 7


cdef object _r(const uint8_t* buf, Py_ssize_t size, Py_ssize_t* pos, dict custom):
    cdef Py_ssize_t p = pos[0], n, i
    cdef uint8_t tag
    cdef double d
    cdef list items
    if p >= size:
        raise ValueError("truncated value")
    tag = buf[p]
    p += 1
    if tag == T_NONE:
        pos[0] = p
        return None
    if tag == T_FALSE or tag == T_TRUE:
        pos[0] = p
        return tag == T_TRUE
    if tag == T_INT:
        z = _get_any(buf, size, &p)
        pos[0] = p
        return z >> 1 if not (z & 1) else -((z + 1) >> 1)
    if tag == T_FLOAT:
        if p + 8 > size:
            raise ValueError("truncated float")
        memcpy(&d, buf + p, 8)
        pos[0] = p + 8
        return d
    if tag == T_TUPLE or tag == T_LIST:
        n = _get_any(buf, size, &p)
        if n > size - p:
            raise ValueError("truncated sequence")
        items = []
        for i in range(n):
            items.append(_r(buf, size, &p, custom))
        pos[0] = p
        return tuple(items) if tag == T_TUPLE else items
    n = _get_any(buf, size, &p)
    if n > size - p:
        raise ValueError("truncated payload")
    raw = (<const char*>buf)[p:p + n]
    pos[0] = p + n
    if tag == T_STR:
        return raw.decode("utf-8")
    if tag == T_BYTES:
        return raw
    if tag == T_PICKLE:
        return pickle.loads(raw)
    dec = custom.get(tag)
    if dec is None:
        raise ValueError(f"unknown value tag {tag}")
    return dec(raw)


def loads(const uint8_t[::1] buf, dict custom):
    """Decode one value spanning all of ``buf``; ``custom`` maps tag -> decoder."""
    cdef Py_ssize_t size = buf.shape[0], p = 0
    if size == 0:
        raise ValueError("truncated value")
    obj = _r(&buf[0], size, &p, custom)
    if p != size:
        raise ValueError("trailing bytes after value")
    return obj


def dumps_many(list objs, dict custom):
    cdef list out = []
    cdef bytearray buf
    for obj in objs:
        buf = bytearray()
        _w(obj, buf, custom)
        out.append(bytes(buf))
    return out


def loads_many(list payloads, dict custom):
    cdef list out = []
    cdef const uint8_t[::1] view
    cdef Py_ssize_t size, p
    for raw in payloads:
        view = raw
        size = view.shape[0]
        if size == 0:
            raise ValueError("truncated value")
        p = 0
        obj = _r(&view[0], size, &p, custom)
        if p != size:
            raise ValueError("trailing bytes after value")
        out.append(obj)
    return out
