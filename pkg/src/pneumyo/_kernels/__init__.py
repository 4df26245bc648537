"""Kernel backend selection.

Imports the compiled extension when available, otherwise the pure-Python
twin. Set ``PNEUMYO_PURE=1`` to force the fallback (used by the benchmark
and the backend-parity tests).
"""

import os

if os.environ.get("PNEUMYO_PURE"):
    from . import _py as _impl
else:
    try:
        from . import _ext as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _py as _impl

BACKEND = _impl.BACKEND_NAME

crc16_ccitt = _impl.crc16_ccitt
cobs_encode = _impl.cobs_encode
cobs_decode = _impl.cobs_decode
solve_stretch = _impl.solve_stretch
run_steps = _impl.run_steps

__all__ = [
    "BACKEND",
    "crc16_ccitt",
    "cobs_encode",
    "cobs_decode",
    "solve_stretch",
    "run_steps",
]
