"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Two kernels dominate Monte Carlo runs:

* ``ss_batch`` -- the twelve sums of squares for a stack of layouts;
* ``betainc`` -- the regularized incomplete beta function, elementwise,
  used for vectorized F tail probabilities.

Set ``STRIPSPLIT_NUMBA=0`` to force the numpy implementations.  The choice
is made once at import time and exposed as ``BACKEND``.
"""
from __future__ import annotations

import math
import os

import numpy as np

_FLAG = os.environ.get("STRIPSPLIT_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "no", "off")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
BACKEND = "numba" if (HAVE_NUMBA and _WANT_NUMBA) else "numpy"

_EPS = 1e-15
_FPMIN = 1e-300
_MAXIT = 10000


# ---------------------------------------------------------------------------
# regularized incomplete beta


def _betacf(a, b, x):
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def betainc_scalar(a: float, b: float, x: float, y: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0.

    ``y`` is 1 - x; pass it when the caller can form it without
    cancellation (x close to 1).
    """
    if y is None:
        y = 1.0 - x
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(y)
    )
    front = math.exp(log_front)
    # the fraction converges fast only below the mean; use the symmetry otherwise
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def _betacf_numpy(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        step = d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * step * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            break
    return h


def _betainc_numpy(a, b, x, y):
    out = np.empty_like(x)
    low = x <= 0.0
    high = (y <= 0.0) & ~low
    inner = ~(low | high)
    out[low] = 0.0
    out[high] = 1.0
    if inner.any():
        ai, bi, xi, yi = a[inner], b[inner], x[inner], y[inner]
        lg = np.vectorize(math.lgamma, otypes=[float])
        front = np.exp(lg(ai + bi) - lg(ai) - lg(bi) + ai * np.log(xi) + bi * np.log(yi))
        direct = xi < (ai + 1.0) / (ai + bi + 2.0)
        res = np.empty_like(xi)
        if direct.any():
            s = direct
            res[s] = front[s] * _betacf_numpy(ai[s], bi[s], xi[s]) / ai[s]
        if (~direct).any():
            s = ~direct
            res[s] = 1.0 - front[s] * _betacf_numpy(bi[s], ai[s], yi[s]) / bi[s]
        out[inner] = res
    return out


# ---------------------------------------------------------------------------
# sums of squares for a stack of layouts


def _ss_batch_loops(y, out):
    # y: (n, r, a, b, c); out: (n, 12) in Source order
    n, r, a, b, c = y.shape
    mh = np.empty(r)
    mi = np.empty(a)
    mj = np.empty(b)
    mk = np.empty(c)
    mhi = np.empty((r, a))
    mhj = np.empty((r, b))
    mij = np.empty((a, b))
    mik = np.empty((a, c))
    mjk = np.empty((b, c))
    mhij = np.empty((r, a, b))
    mijk = np.empty((a, b, c))
    for t in range(n):
        mh[:] = 0.0
        mi[:] = 0.0
        mj[:] = 0.0
        mk[:] = 0.0
        mhi[:, :] = 0.0
        mhj[:, :] = 0.0
        mij[:, :] = 0.0
        mik[:, :] = 0.0
        mjk[:, :] = 0.0
        mhij[:, :, :] = 0.0
        mijk[:, :, :] = 0.0
        tot = 0.0
        for h in range(r):
            for i in range(a):
                for j in range(b):
                    for k in range(c):
                        v = y[t, h, i, j, k]
                        tot += v
                        mh[h] += v
                        mi[i] += v
                        mj[j] += v
                        mk[k] += v
                        mhi[h, i] += v
                        mhj[h, j] += v
                        mij[i, j] += v
                        mik[i, k] += v
                        mjk[j, k] += v
                        mhij[h, i, j] += v
                        mijk[i, j, k] += v
        m = tot / (r * a * b * c)
        mh /= a * b * c
        mi /= r * b * c
        mj /= r * a * c
        mk /= r * a * b
        mhi /= b * c
        mhj /= a * c
        mij /= r * c
        mik /= r * b
        mjk /= r * a
        mhij /= c
        mijk /= r

        s_r = 0.0
        for h in range(r):
            s_r += (mh[h] - m) ** 2
        s_a = 0.0
        for i in range(a):
            s_a += (mi[i] - m) ** 2
        s_b = 0.0
        for j in range(b):
            s_b += (mj[j] - m) ** 2
        s_c = 0.0
        for k in range(c):
            s_c += (mk[k] - m) ** 2
        s_ea = 0.0
        for h in range(r):
            for i in range(a):
                s_ea += (mhi[h, i] - mh[h] - mi[i] + m) ** 2
        s_eb = 0.0
        for h in range(r):
            for j in range(b):
                s_eb += (mhj[h, j] - mh[h] - mj[j] + m) ** 2
        s_ab = 0.0
        for i in range(a):
            for j in range(b):
                s_ab += (mij[i, j] - mi[i] - mj[j] + m) ** 2
        s_ac = 0.0
        for i in range(a):
            for k in range(c):
                s_ac += (mik[i, k] - mi[i] - mk[k] + m) ** 2
        s_bc = 0.0
        for j in range(b):
            for k in range(c):
                s_bc += (mjk[j, k] - mj[j] - mk[k] + m) ** 2
        s_eab = 0.0
        for h in range(r):
            for i in range(a):
                for j in range(b):
                    s_eab += (
                        mhij[h, i, j] - mhi[h, i] - mhj[h, j] - mij[i, j]
                        + mh[h] + mi[i] + mj[j] - m
                    ) ** 2
        s_abc = 0.0
        for i in range(a):
            for j in range(b):
                for k in range(c):
                    s_abc += (
                        mijk[i, j, k] - mik[i, k] - mjk[j, k] + mk[k]
                        - mij[i, j] + mi[i] + mj[j] - m
                    ) ** 2
        s_et = 0.0
        for h in range(r):
            for i in range(a):
                for j in range(b):
                    for k in range(c):
                        s_et += (y[t, h, i, j, k] - mijk[i, j, k] - mhij[h, i, j] + mij[i, j]) ** 2

        out[t, 0] = a * b * c * s_r
        out[t, 1] = b * c * r * s_a
        out[t, 2] = b * c * s_ea
        out[t, 3] = a * c * r * s_b
        out[t, 4] = a * c * s_eb
        out[t, 5] = c * r * s_ab
        out[t, 6] = c * s_eab
        out[t, 7] = a * b * r * s_c
        out[t, 8] = b * r * s_ac
        out[t, 9] = a * r * s_bc
        out[t, 10] = r * s_abc
        out[t, 11] = s_et
    return out


def _ss_batch_numpy(y):
    n, r, a, b, c = y.shape

    def mean(*keep):
        drop = tuple(ax for ax in (1, 2, 3, 4) if ax not in keep)
        return y.mean(axis=drop, keepdims=True)

    def total(arr):
        return arr.reshape(n, -1).sum(axis=1)

    m = mean()
    mh, mi, mj, mk = mean(1), mean(2), mean(3), mean(4)
    mhi, mhj, mij = mean(1, 2), mean(1, 3), mean(2, 3)
    mik, mjk = mean(2, 4), mean(3, 4)
    mhij, mijk = mean(1, 2, 3), mean(2, 3, 4)

    out = np.empty((n, 12))
    out[:, 0] = a * b * c * total((mh - m) ** 2)
    out[:, 1] = b * c * r * total((mi - m) ** 2)
    out[:, 2] = b * c * total((mhi - mh - mi + m) ** 2)
    out[:, 3] = a * c * r * total((mj - m) ** 2)
    out[:, 4] = a * c * total((mhj - mh - mj + m) ** 2)
    out[:, 5] = c * r * total((mij - mi - mj + m) ** 2)
    out[:, 6] = c * total((mhij - mhi - mhj - mij + mh + mi + mj - m) ** 2)
    out[:, 7] = a * b * r * total((mk - m) ** 2)
    out[:, 8] = b * r * total((mik - mi - mk + m) ** 2)
    out[:, 9] = a * r * total((mjk - mj - mk + m) ** 2)
    out[:, 10] = r * total((mijk - mik - mjk + mk - mij + mi + mj - m) ** 2)
    out[:, 11] = total((y - mijk - mhij + mij) ** 2)
    return out


# ---------------------------------------------------------------------------
# compiled variants

if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    _betacf_jit = _jit(_betacf)

    # betainc_scalar resolves _betacf from module globals; rebind for the jit copy
    def _make_betainc_jit():
        betacf = _betacf_jit
        lgamma = math.lgamma
        log = math.log
        exp = math.exp

        def betainc_jit(a, b, x, y):
            if x <= 0.0:
                return 0.0
            if y <= 0.0:
                return 1.0
            front = exp(lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(y))
            if x < (a + 1.0) / (a + b + 2.0):
                return front * betacf(a, b, x) / a
            return 1.0 - front * betacf(b, a, y) / b

        return numba.njit(nogil=True)(betainc_jit)

    _betainc_scalar_jit = _make_betainc_jit()

    @numba.njit(nogil=True)
    def _betainc_loop_jit(a, b, x, y, out):
        for n in range(out.size):
            out[n] = _betainc_scalar_jit(a[n], b[n], x[n], y[n])
        return out

    _ss_batch_loops_jit = _jit(_ss_batch_loops)
else:  # pragma: no cover
    _betainc_loop_jit = None
    _ss_batch_loops_jit = None


def _with_complement(a, b, x, y):
    if y is None:
        y = 1.0 - np.asarray(x, dtype=np.float64)
    return [np.ascontiguousarray(v).ravel() for v in _broadcast_float(a, b, x, y)]


def betainc_numba(a, b, x, y=None) -> np.ndarray:
    shape = np.broadcast(np.asarray(a), np.asarray(b), np.asarray(x)).shape
    a, b, x, y = _with_complement(a, b, x, y)
    out = np.empty(x.size)
    _betainc_loop_jit(a, b, x, y, out)
    return out.reshape(shape)


def betainc_numpy(a, b, x, y=None) -> np.ndarray:
    shape = np.broadcast(np.asarray(a), np.asarray(b), np.asarray(x)).shape
    return _betainc_numpy(*_with_complement(a, b, x, y)).reshape(shape)


def ss_batch_numba(y) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.float64)
    return _ss_batch_loops_jit(y, np.empty((y.shape[0], 12)))


def ss_batch_numpy(y) -> np.ndarray:
    return _ss_batch_numpy(np.asarray(y, dtype=np.float64))


def betainc(a, b, x, y=None) -> np.ndarray:
    """Elementwise I_x(a, b) with the active backend; ``y`` optionally gives 1 - x."""
    if BACKEND == "numba":
        return betainc_numba(a, b, x, y)
    return betainc_numpy(a, b, x, y)


def ss_batch(y) -> np.ndarray:
    """Twelve sums of squares per layout for ``y`` of shape (n, r, a, b, c)."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 5:
        raise ValueError("expected an array of shape (n, r, a, b, c)")
    if BACKEND == "numba":
        return ss_batch_numba(y)
    return ss_batch_numpy(y)


def _broadcast_float(*arrays):
    return np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in arrays))
