import os
import subprocess
import sys

import numpy as np
import pytest

from nlburgers import _backend, _fallback
from nlburgers.kernels import SPECTRAL, _weights

HAVE_CORE = "cython" in _backend.available()
needs_core = pytest.mark.skipif(not HAVE_CORE, reason="compiled core not built")


def test_python_always_available():
    assert "python" in _backend.available()
    assert _backend.BACKEND in _backend.available()


def test_use_rejects_unknown():
    with pytest.raises(ValueError, match="unknown backend"):
        _backend.use("fortran")


def test_use_returns_previous():
    prev = _backend.use("python")
    try:
        assert _backend.use("python") == "python"
    finally:
        _backend.use(prev)


def test_set_threads_floors_at_one():
    old = _backend.THREADS
    try:
        _backend.set_threads(0)
        assert _backend.THREADS == 1
    finally:
        _backend.set_threads(old)


@needs_core
@pytest.mark.parametrize("n", [4, 6, 32, 128, 256])
def test_backends_agree(rng, n):
    from nlburgers import _core

    w = _weights(n, SPECTRAL.c1)
    f, g = rng.standard_normal((2, n))
    a = _core.pv_sum(f, g, w, 1)
    b = _fallback.pv_sum(f, g, w, 1)
    assert np.max(np.abs(a - b)) <= 1e-14 * np.max(np.abs(b))
    wv = np.abs(f) + 0.5
    a = _core.w_sum(wv, g, w, 1)
    b = _fallback.w_sum(wv, g, w, 1)
    assert np.max(np.abs(a - b)) <= 1e-14 * np.max(np.abs(b))


@needs_core
def test_core_bitwise_across_thread_counts(rng):
    from nlburgers import _core

    n = 512
    w = _weights(n, SPECTRAL.c1)
    f, g = rng.standard_normal((2, n))
    ref = _core.pv_sum(f, g, w, 1)
    for k in (2, 3, 8):
        np.testing.assert_array_equal(_core.pv_sum(f, g, w, k), ref)


def _probe(env_extra):
    env = dict(os.environ)
    env.update(env_extra)
    code = "from nlburgers import _backend; print(_backend.BACKEND, _backend.THREADS)"
    return subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)


def test_env_forces_python():
    out = _probe({"NLB_BACKEND": "python", "NLB_THREADS": "3"})
    assert out.returncode == 0, out.stderr
    assert out.stdout.split() == ["python", "3"]


def test_env_unknown_backend_fails_at_import():
    out = _probe({"NLB_BACKEND": "gpu"})
    assert out.returncode != 0 and "NLB_BACKEND" in out.stderr
