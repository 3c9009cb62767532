import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qsvt_hs import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


@needs_numba
@given(arrays(np.float64, st.integers(1, 60), elements=st.floats(-2, 2)),
       arrays(np.float64, st.integers(1, 40), elements=st.floats(-1, 1)))
def test_clenshaw_paths_agree(c, x):
    assert np.allclose(K.clenshaw_numpy(c, x), K.clenshaw_numba(c, x), atol=1e-12)


@needs_numba
@given(arrays(np.float64, st.integers(2, 30), elements=st.floats(-np.pi, np.pi)),
       arrays(np.float64, st.integers(1, 20), elements=st.floats(-1, 1)))
def test_wx_paths_agree(ph, x):
    v0, g0 = K.wx_value_grad_numpy(ph, x)
    v1, g1 = K.wx_value_grad_numba(ph, x)
    assert np.allclose(v0, v1, atol=1e-12) and np.allclose(g0, g1, atol=1e-12)


def test_wx_gradient_by_finite_difference(rng):
    ph = rng.uniform(-np.pi, np.pi, 9)
    x = np.linspace(-0.9, 0.9, 7)
    _, g = K.wx_value_grad_numpy(ph, x)
    h = 1e-6
    for j in range(ph.size):
        e = np.zeros_like(ph)
        e[j] = h
        fd = (K.wx_value_grad_numpy(ph + e, x)[0].real - K.wx_value_grad_numpy(ph - e, x)[0].real) / (2 * h)
        assert np.allclose(g[:, j], fd, atol=1e-8)


@needs_numba
def test_euler_paths_agree(rng):
    n = 16
    F0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    kv, w = rng.normal(size=n), rng.normal(size=n) * 0.1
    rec = np.array([0, 3, 3, 50, 200], dtype=np.int64)
    E0, F0r = K.euler_numpy(F0, 0.2j, kv, w, 1e-3, 200, rec)
    E1, F1r = K.euler_numba(F0, 0.2j, kv, w, 1e-3, 200, rec)
    assert np.allclose(E0, E1, atol=1e-14) and np.allclose(F0r, F1r, atol=1e-14)
    assert E0.shape == (201,) and F0r.shape == (5, n)


@pytest.mark.parametrize("flag,expect", [("1", "False"), ("0", str(K.HAVE_NUMBA))])
def test_env_flag_selects_path(flag, expect):
    env = dict(os.environ, QSVT_HS_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from qsvt_hs import _kernels as K; print(K.USE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expect
