"""Numba acceleration switch.

Every hot kernel in :mod:`ssmc.kernels` ships in two builds: a numba
``@njit`` build and a pure-numpy build.  The environment variable
``SSMC_NUMBA`` picks the active one at import time:

* ``SSMC_NUMBA=1`` (default): use the JIT build when numba is importable.
* ``SSMC_NUMBA=0`` (also ``false``/``off``/``no``): force the numpy build.

Both builds of every kernel stay importable regardless of the switch so
that tests and ``benchmarks/bench_kernels.py`` can compare them directly.
"""

import os

_OFF_VALUES = {"0", "false", "off", "no"}


def _env_wants_numba() -> bool:
    return os.environ.get("SSMC_NUMBA", "1").strip().lower() not in _OFF_VALUES


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

NUMBA_ENABLED = HAVE_NUMBA and _env_wants_numba()


def jit_build(func):
    """Return the compiled build of ``func`` (or ``func`` itself without numba).

    Compilation is lazy (first call) and cached on disk, so merely defining
    the JIT build costs nothing when it is never invoked.
    """
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
