"""JIT dispatch for the hot numeric kernels.

Compiled (numba) kernels are the default whenever numba imports cleanly.
Setting the environment variable ``FORESTPERC_NUMBA=0`` before import
forces the pure-numpy fallback implementations instead; any other value
(or an absent variable) leaves compilation on.  Every kernel module keeps
both paths behind the same function name, so results are interchangeable
and `benchmarks/bench_kernels.py` can time one against the other.
"""
from __future__ import annotations

import os

_flag = os.environ.get("FORESTPERC_NUMBA", "1").strip().lower()
_want_jit = _flag not in ("0", "false", "off", "no")

NUMBA_ENABLED = False

if _want_jit:
    try:
        from numba import njit  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        _want_jit = False

if not _want_jit:

    def njit(func=None, **kwargs):
        """Pass-through decorator so `@njit`-marked code stays importable."""

        def wrap(f):
            return f

        if func is None:
            return wrap
        return wrap(func)
