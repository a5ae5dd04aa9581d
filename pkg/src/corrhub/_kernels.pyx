# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: vectorised incomplete beta and the hull-pruned GLR step.

``corrhub._purepy`` holds the reference versions with identical contracts.
"""

from libc.math cimport exp, log, log1p, fabs, INFINITY

cdef double _EPS = 1e-16
cdef double _FPMIN = 1e-300
cdef int _MAXIT = 20000


cdef double _betacf(double a, double b, double x, int *ok) noexcept nogil:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if fabs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _EPS:
            return h
    ok[0] = 0
    return h


cdef double _betainc(double x, double a, double b, double lnbeta, int *ok) noexcept nogil:
    cdef double front
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = exp(a * log(x) + b * log1p(-x) - lnbeta)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x, ok) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x, ok) / b


def reg_inc_beta_array(const double[:] x, double a, double b, double lnbeta, double[:] out):
    """Fill ``out`` with I_x(a, b); return the count of non-converged entries."""
    cdef Py_ssize_t i, size = x.shape[0]
    cdef int ok
    cdef int bad = 0
    with nogil:
        for i in range(size):
            ok = 1
            out[i] = _betainc(x[i], a, b, lnbeta, &ok)
            if not ok:
                bad += 1
    return bad


cdef inline double _upper_value(double nw, double sw, double j_lo, double j_max) noexcept nogil:
    cdef double j
    if sw <= 0.0:
        j = j_max
    else:
        j = nw / sw
        if j < j_lo:
            j = j_lo
        elif j > j_max:
            j = j_max
    return nw * log(j) - (j - 1.0) * sw


cdef inline double _lower_value(double nw, double sw, double j_hi) noexcept nogil:
    cdef double j
    if sw <= 0.0:
        j = j_hi
    else:
        j = nw / sw
        if j > j_hi:
            j = j_hi
    return nw * log(j) - (j - 1.0) * sw


def glr_hull_step(
    const double[:] z,
    double[:] total,
    double m,
    double[:, :] up_x,
    double[:, :] up_y,
    long long[:] up_len,
    double[:, :] lo_x,
    double[:, :] lo_y,
    long long[:] lo_len,
    double j_lo,
    double j_hi,
    double j_max,
    bint two_sided,
    double[:] g_out,
):
    """Advance every detector in the bank by one observation.

    ``total`` holds the running sums S_{m-1} on entry and S_m on exit.  The
    candidate change points are the vertices of the upper (and, two-sided,
    lower) convex hull of the points (k, S_k), k < m; callers guarantee one
    free slot of hull capacity per row.
    """
    cdef Py_ssize_t v, h, nv = z.shape[0]
    cdef long long ln
    cdef double px, py, ox, oy, ax, ay, cross, s_m, best, val
    with nogil:
        for v in range(nv):
            px = m - 1.0
            py = total[v]
            ln = up_len[v]
            while ln >= 2:
                ox = up_x[v, ln - 2]
                oy = up_y[v, ln - 2]
                ax = up_x[v, ln - 1]
                ay = up_y[v, ln - 1]
                cross = (ax - ox) * (py - oy) - (ay - oy) * (px - ox)
                if cross >= 0.0:
                    ln -= 1
                else:
                    break
            up_x[v, ln] = px
            up_y[v, ln] = py
            up_len[v] = ln + 1
            if two_sided:
                ln = lo_len[v]
                while ln >= 2:
                    ox = lo_x[v, ln - 2]
                    oy = lo_y[v, ln - 2]
                    ax = lo_x[v, ln - 1]
                    ay = lo_y[v, ln - 1]
                    cross = (ax - ox) * (py - oy) - (ay - oy) * (px - ox)
                    if cross <= 0.0:
                        ln -= 1
                    else:
                        break
                lo_x[v, ln] = px
                lo_y[v, ln] = py
                lo_len[v] = ln + 1

            s_m = py + z[v]
            total[v] = s_m
            best = -INFINITY
            for h in range(up_len[v]):
                val = _upper_value(m - up_x[v, h], s_m - up_y[v, h], j_lo, j_max)
                if val > best:
                    best = val
            if two_sided:
                for h in range(lo_len[v]):
                    val = _lower_value(m - lo_x[v, h], s_m - lo_y[v, h], j_hi)
                    if val > best:
                        best = val
            g_out[v] = best
