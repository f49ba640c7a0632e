"""Kernel backend selection.

The compiled extension is preferred when built; the pure-Python module is a
drop-in replacement.  Set JACARANDA_PURE=1 to force the fallback (used by the
benchmark and the backend-parity tests).
"""

import os

if os.environ.get("JACARANDA_PURE", "") not in ("", "0"):
    from jacaranda import _kernels as _impl
else:
    try:
        from jacaranda import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from jacaranda import _kernels as _impl  # type: ignore[no-redef]

BACKEND = _impl.BACKEND
pack_bits = _impl.pack_bits
unpack_bits = _impl.unpack_bits
gather_square = _impl.gather_square
spread_pairs = _impl.spread_pairs
