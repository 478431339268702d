import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphene import _kernels_py, kernels
from oracles import leb128

BOUNDARY = [0, 1, 127, 128, 255, 16383, 16384, 2**32 - 1, 2**56, 2**63, 2**64 - 1]


@pytest.mark.parametrize("value", BOUNDARY)
def test_uvarint_matches_reference(backend, value):
    enc = backend.encode_uvarint(value)
    assert enc == leb128(value)
    assert backend.decode_uvarint(enc, 0) == (value, len(enc))


def test_uvarint_300_is_two_bytes(backend):
    assert backend.encode_uvarint(300) == b"\xac\x02"


def test_uvarint_rejects_negative_and_oversize(backend):
    with pytest.raises(OverflowError):
        backend.encode_uvarint(-1)
    with pytest.raises(ValueError):
        backend.decode_uvarint(b"\x80\x80", 0)
    with pytest.raises(ValueError):
        backend.decode_uvarint(b"\xff" * 10 + b"\x01", 0)
    with pytest.raises(ValueError):
        backend.decode_uvarint(b"\xff" * 9 + b"\x02", 0)


def test_max_u64_takes_ten_bytes(backend):
    assert len(backend.encode_uvarint(2**64 - 1)) == 10


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 2**64 - 1), max_size=50))
def test_uvarint_column_roundtrip(values):
    arr = np.array(values, dtype=np.uint64)
    for mod in kernels.backends():
        enc = mod.encode_uvarints(arr)
        assert enc == b"".join(leb128(v) for v in values)
        out, pos = mod.decode_uvarints(enc, 0, len(values))
        assert pos == len(enc)
        assert out.tolist() == values


@settings(max_examples=100, deadline=None)
@given(st.lists(st.binary(max_size=40), max_size=30))
def test_chunks_roundtrip(chunks):
    for mod in kernels.backends():
        enc = mod.encode_chunks(chunks)
        out, pos = mod.decode_chunks(enc, 0, len(chunks))
        assert out == chunks and pos == len(enc)


def test_chunks_truncated(backend):
    enc = backend.encode_chunks([b"abcdef"])
    with pytest.raises(ValueError):
        backend.decode_chunks(enc[:-1], 0, 1)


def test_hash_backends_agree():
    ids = np.array([0, 1, 2, 2**63, 2**64 - 1, 12345], dtype=np.uint64)
    ref = _kernels_py.hash64_array(ids, 3)
    for mod in kernels.backends():
        assert mod.hash64_array(ids, 3).tolist() == ref.tolist()
        assert [mod.hash64(int(i), 3) for i in ids] == ref.tolist()


def test_hash_spreads_consecutive_ids(backend):
    h = backend.hash64_array(np.arange(4000, dtype=np.uint64), 0)
    counts = np.bincount((h % np.uint64(4)).astype(np.int64), minlength=4)
    assert counts.min() > 850


VALUES = [None, True, False, 0, -1, 63, -64, 64, 2**64, -(2**70), 1.5, float("inf"), "héllo",
          b"\x00x", (1, (2.0, "a"), [None]), [], (), {"a": 1}, frozenset({3})]


@pytest.mark.parametrize("value", VALUES, ids=repr)
def test_value_codec_backends_agree(value):
    encs = {mod.BACKEND: mod.dumps(value, {}) for mod in kernels.backends()}
    assert len(set(encs.values())) == 1
    for mod in kernels.backends():
        assert mod.loads(next(iter(encs.values())), {}) == value
        assert mod.loads_many([next(iter(encs.values()))], {}) == [value]


@pytest.mark.parametrize("bad", [b"", b"\x04\x00", b"\x07\x05\x00", b"\x03\x80", b"\x00\x00", b"\x20\x00"])
def test_value_codec_rejects_malformed(backend, bad):
    with pytest.raises(ValueError):
        backend.loads(bad, {})


def test_fallback_selected_by_env(monkeypatch):
    import importlib
    monkeypatch.setenv("GRAPHENE_PURE", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("GRAPHENE_PURE")
        importlib.reload(kernels)
