"""Select the quadrature kernel implementation at import time.

The compiled extension is used when it is importable; ``NLB_BACKEND=python``
forces the numpy fallback. ``NLB_THREADS`` caps the number of threads the
compiled kernels may use.
"""
import os

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_IMPLS = {"python": _fallback}
if _core is not None:
    _IMPLS["cython"] = _core


def _default_backend():
    requested = os.environ.get("NLB_BACKEND", "").strip().lower()
    if requested:
        if requested not in _IMPLS:
            raise ImportError(
                f"NLB_BACKEND={requested!r} unavailable; have {sorted(_IMPLS)}")
        return requested
    return "cython" if "cython" in _IMPLS else "python"


def _default_threads():
    raw = os.environ.get("NLB_THREADS")
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


BACKEND = _default_backend()
THREADS = _default_threads()
_impl = _IMPLS[BACKEND]


def available():
    return sorted(_IMPLS)


def use(name):
    """Switch backend; returns the previous name."""
    global BACKEND, _impl
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}; have {sorted(_IMPLS)}")
    prev, BACKEND, _impl = BACKEND, name, _IMPLS[name]
    return prev


def set_threads(k):
    global THREADS
    THREADS = max(1, int(k))


def pv_sum(f, g, w):
    return _impl.pv_sum(f, g, w, THREADS)


def w_sum(wv, r, w):
    return _impl.w_sum(wv, r, w, THREADS)
