import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stripsplit import kernels
from stripsplit.data import BalancedLayout
from stripsplit.design import Source
from stripsplit.sums_of_squares import ss_direct

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


def _stack(seed, shape=(7, 2, 3, 4, 2)):
    return np.random.default_rng(seed).normal(size=shape) * 5 + 2


def test_numpy_ss_matches_direct():
    y = _stack(1)
    out = kernels.ss_batch_numpy(y)
    for n in range(y.shape[0]):
        layout = BalancedLayout.from_array(y[n])
        want = [ss_direct(layout, s) for s in Source]
        assert np.allclose(out[n], want, rtol=1e-12, atol=1e-12)


@needs_numba
@pytest.mark.parametrize("shape", [(5, 2, 2, 2, 2), (3, 4, 5, 4, 3), (1, 3, 2, 2, 5)])
def test_backends_agree_ss(shape):
    y = _stack(2, shape)
    a = kernels.ss_batch_numba(y)
    b = kernels.ss_batch_numpy(y)
    assert np.allclose(a, b, rtol=1e-11, atol=1e-11)


@needs_numba
@given(st.floats(0.25, 500), st.floats(0.25, 500), st.floats(0, 1))
def test_backends_agree_betainc(a, b, x):
    one = kernels.betainc_numba([a], [b], [x])[0]
    two = kernels.betainc_numpy([a], [b], [x])[0]
    three = kernels.betainc_scalar(a, b, x)
    # lgamma terms reach ~3e3 here, so each path carries ~1e-13 of rounding
    assert abs(one - two) <= 5e-13
    assert abs(one - three) <= 5e-13


def test_betainc_against_scipy():
    from scipy import special

    rng = np.random.default_rng(4)
    a = rng.uniform(0.3, 80, 400)
    b = rng.uniform(0.3, 80, 400)
    x = rng.uniform(0, 1, 400)
    for fn in (kernels.betainc_numpy, kernels.betainc):
        assert np.max(np.abs(fn(a, b, x) - special.betainc(a, b, x))) <= 1e-11


def test_betainc_edges():
    out = kernels.betainc([2.0, 2.0], [3.0, 3.0], [0.0, 1.0])
    assert list(out) == [0.0, 1.0]


def test_ss_batch_shape_check():
    with pytest.raises(ValueError):
        kernels.ss_batch(np.zeros((2, 2, 2, 2)))


def _backend_in_subprocess(flag):
    env = dict(os.environ, STRIPSPLIT_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from stripsplit import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    return out.stdout.strip()


def test_env_flag_selects_backend():
    assert _backend_in_subprocess("0") == "numpy"
    assert _backend_in_subprocess("off") == "numpy"
    if kernels.HAVE_NUMBA:
        assert _backend_in_subprocess("1") == "numba"
