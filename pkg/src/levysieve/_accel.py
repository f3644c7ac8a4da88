"""Optional numba acceleration.

Hot loops are written once as scalar Python and compiled with ``numba.njit``
when numba is importable.  Every kernel also has a vectorised numpy twin; the
twin is used when numba is missing or when ``LEVYSIEVE_NUMBA=0``.
"""
from __future__ import annotations

import os

try:
    import numba

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is too old and only produces a warning when probed
        numba.config.THREADING_LAYER = "omp"
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

_OFF = ("0", "false", "no", "off")


def numba_enabled() -> bool:
    flag = os.environ.get("LEVYSIEVE_NUMBA", "1").strip().lower()
    return HAVE_NUMBA and flag not in _OFF


def resolve_backend(backend: str | None) -> str:
    """Map ``None``/``"auto"`` to the backend selected by the environment."""
    if backend is None or backend == "auto":
        return "numba" if numba_enabled() else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}; expected 'numba' or 'numpy'")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


if HAVE_NUMBA:
    njit = numba.njit
    prange = numba.prange
else:  # pragma: no cover

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range


def set_threads(n: int | None = None) -> int:
    """Set the numba worker count; 0 or None means automatic.

    Falls back to ``LEVYSIEVE_THREADS``.  Results never depend on this value,
    only wall time does.
    """
    if n is None:
        env = os.environ.get("LEVYSIEVE_THREADS", "").strip()
        n = int(env) if env else 0
    if n < 0:
        raise ValueError(f"thread count must be >= 0, got {n}")
    if not HAVE_NUMBA:
        return 1
    limit = numba.config.NUMBA_NUM_THREADS
    n = limit if n == 0 else min(n, limit)
    numba.set_num_threads(n)
    return n
