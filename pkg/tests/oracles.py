"""Slow reference implementations used as test oracles."""

import math

import numpy as np


def _best(nw, sw, lo, hi):
    """max of nw ln J - (J-1) sw over J in [lo, hi]; concave, so clamp the MLE."""
    j = math.inf if sw == 0 else nw / sw
    j = min(max(j, lo), hi)
    return nw * math.log(j) - (j - 1.0) * sw


def naive_glr(z, eps, two_sided=False, j_max=1e6, window=None):
    """G after every step for one scalar stream, recomputed from scratch."""
    out = []
    for m in range(1, len(z) + 1):
        first = 1 if window is None else max(1, m - window + 1)
        best = -math.inf
        for start in range(first, m + 1):
            seg = z[start - 1:m]
            nw, sw = len(seg), math.fsum(seg)
            best = max(best, _best(nw, sw, 1.0 + eps, j_max))
            if two_sided and eps < 1.0:
                best = max(best, _best(nw, sw, 1e-300, 1.0 - eps))
        out.append(best)
    return np.array(out)


def grid_glr(z, eps, j_max, points=200_000):
    """G at the last step with the supremum taken over a log-spaced J grid."""
    js = np.exp(np.linspace(math.log1p(eps), math.log(j_max), points))
    s = np.cumsum(np.concatenate([[0.0], z]))
    m = len(z)
    best = -math.inf
    for start in range(m):
        nw, sw = m - start, s[m] - s[start]
        best = max(best, float(np.max(nw * np.log(js) - (js - 1.0) * sw)))
    step = math.log(js[1] / js[0])
    return best, step
