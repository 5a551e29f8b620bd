"""Numba dispatch: JIT the hot kernels unless the fallback path is requested.

Set ``TVMRF_DISABLE_NUMBA=1`` in the environment (before import) to run the
kernels as plain numpy/Python.  Results are identical either way; only speed
differs.  ``benchmarks/bench_dp.py`` compares the two paths.
"""

import os

_flag = os.environ.get("TVMRF_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

NUMBA_ENABLED = False

if not _disabled:
    try:
        from numba import njit as _numba_njit

        NUMBA_ENABLED = True
    except ImportError:
        pass

if NUMBA_ENABLED:

    def njit(*args, **kwargs):
        return _numba_njit(*args, **kwargs)

else:

    def njit(*args, **kwargs):
        # plain-Python passthrough with the same decorator signature
        if args and callable(args[0]):
            return args[0]

        def deco(func):
            return func

        return deco
