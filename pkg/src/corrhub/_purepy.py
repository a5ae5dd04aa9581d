"""NumPy reference versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

_EPS = 1e-16
_FPMIN = 1e-300
_MAXIT = 20000


def _betacf(a, b, x):
    """Modified Lentz evaluation of the incomplete-beta continued fraction.

    ``a``, ``b`` and ``x`` are equal-length arrays; every element iterates
    until its own convergence test passes.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _MAXIT + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return h, 0
        ai, bi, xi = a[idx], b[idx], x[idx]
        ci, di = c[idx], d[idx]
        m2 = 2 * m
        aa = m * (bi - m) * xi / ((qam[idx] + m2) * (ai + m2))
        di = 1.0 + aa * di
        di = np.where(np.abs(di) < _FPMIN, _FPMIN, di)
        ci = 1.0 + aa / ci
        ci = np.where(np.abs(ci) < _FPMIN, _FPMIN, ci)
        di = 1.0 / di
        hi = h[idx] * di * ci
        aa = -(ai + m) * (qab[idx] + m) * xi / ((ai + m2) * (qap[idx] + m2))
        di = 1.0 + aa * di
        di = np.where(np.abs(di) < _FPMIN, _FPMIN, di)
        ci = 1.0 + aa / ci
        ci = np.where(np.abs(ci) < _FPMIN, _FPMIN, ci)
        di = 1.0 / di
        delta = di * ci
        h[idx] = hi * delta
        c[idx] = ci
        d[idx] = di
        active[idx] = np.abs(delta - 1.0) >= _EPS
    return h, int(active.sum())


def reg_inc_beta_array(x, a, b, lnbeta, out):
    """Fill ``out`` with I_x(a, b); return the count of non-converged entries."""
    x = np.asarray(x, dtype=float)
    out[:] = np.where(x >= 1.0, 1.0, 0.0)
    inner = (x > 0.0) & (x < 1.0)
    if not inner.any():
        return 0
    xi = x[inner]
    front = np.exp(a * np.log(xi) + b * np.log1p(-xi) - lnbeta)
    swap = xi >= (a + 1.0) / (a + b + 2.0)
    aa = np.where(swap, b, a)
    bb = np.where(swap, a, b)
    xx = np.where(swap, 1.0 - xi, xi)
    cf, bad = _betacf(aa, bb, xx)
    val = front * cf / aa
    out[inner] = np.where(swap, 1.0 - val, val)
    return bad


def window_values(nw, sw, j_lo, j_hi, j_max, two_sided):
    """Clamped-MLE supremum of ``nw*ln J - (J-1)*sw`` for arrays of windows."""
    with np.errstate(divide="ignore", invalid="ignore"):
        j_hat = np.where(sw > 0.0, nw / np.where(sw > 0.0, sw, 1.0), np.inf)
    j_up = np.clip(j_hat, j_lo, j_max)
    best = nw * np.log(j_up) - (j_up - 1.0) * sw
    if two_sided:
        j_dn = np.minimum(j_hat, j_hi)
        best = np.maximum(best, nw * np.log(j_dn) - (j_dn - 1.0) * sw)
    return best
