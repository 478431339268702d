"""Selects the compiled kernel module, falling back to pure Python.

Set ``GRAPHENE_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("GRAPHENE_PURE", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = _impl.BACKEND
hash64 = _impl.hash64
hash64_array = _impl.hash64_array
encode_uvarint = _impl.encode_uvarint
decode_uvarint = _impl.decode_uvarint
encode_uvarints = _impl.encode_uvarints
decode_uvarints = _impl.decode_uvarints
encode_chunks = _impl.encode_chunks
decode_chunks = _impl.decode_chunks
dumps = _impl.dumps
loads = _impl.loads
dumps_many = _impl.dumps_many
loads_many = _impl.loads_many


def backends():
    """Return every importable backend module, pure Python first."""
    mods = [_kernels_py]
    try:
        from . import _kernels
        mods.append(_kernels)
    except ImportError:
        pass
    return mods
