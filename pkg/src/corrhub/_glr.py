"""Banks of parallel GLR CUSUM statistics for exponential sufficient statistics.

Each detector sees a stream z_1, z_2, ... and reports

    G(m) = max_{l <= m} sup_{J admissible} sum_{i=l}^m [ln J - (J - 1) z_i]

where the admissible set is J >= 1 + eps (one-sided) or additionally
0 < J <= 1 - eps (two-sided), capped at ``j_max``.  For fixed J the best
window start is a vertex of the upper (J > 1) or lower (J < 1) convex hull of
the partial-sum path, which ``HullBank`` exploits; ``ScanBank`` scans every
start and also supports a bounded lookback window.
"""

import numpy as np

from corrhub import _backend, _purepy


class _Bank:
    def __init__(self, size: int, eps: float, two_sided: bool, j_max: float):
        if size < 1:
            raise ValueError("bank needs at least one detector")
        if not eps > 0:
            raise ValueError(f"eps must be positive, got {eps!r}")
        if not j_max > 1.0 + eps:
            raise ValueError("j_max must exceed 1 + eps")
        self.size = size
        self.eps = float(eps)
        self.j_lo = 1.0 + self.eps
        self.j_hi = 1.0 - self.eps
        # the lower side is empty once eps >= 1 (J must stay positive)
        self.two_sided = bool(two_sided) and self.j_hi > 0.0
        self.j_max = float(j_max)
        self.m = 0
        self.total = np.zeros(size)
        self.g = np.full(size, -np.inf)

    def _check(self, z):
        z = np.ascontiguousarray(z, dtype=float).reshape(-1)
        if z.size != self.size:
            raise ValueError(f"expected {self.size} statistics, got {z.size}")
        if np.any(~np.isfinite(z)) or np.any(z < 0.0):
            raise ValueError("sufficient statistics must be finite and non-negative")
        return z


class ScanBank(_Bank):
    """Exhaustive scan over change points (optionally the last ``window``)."""

    def __init__(self, size, eps, two_sided=False, j_max=1e6, window=None):
        super().__init__(size, eps, two_sided, j_max)
        if window is not None and window < 1:
            raise ValueError("window must be a positive integer or None")
        self.window = window
        cap = 64 if window is None else window
        self._hist = np.zeros((cap, size))  # S_k for retained k, oldest first
        self._len = 0

    def _append(self, row):
        if self.window is not None and self._len == self.window:
            self._hist[:-1] = self._hist[1:]
            self._len -= 1
        elif self._len == self._hist.shape[0]:
            self._hist = np.concatenate([self._hist, np.zeros_like(self._hist)])
        self._hist[self._len] = row
        self._len += 1

    def update(self, z) -> np.ndarray:
        z = self._check(z)
        self._append(self.total)
        self.m += 1
        self.total = self.total + z
        starts = self._hist[: self._len]
        first_k = self.m - self._len
        nw = (self.m - np.arange(first_k, self.m, dtype=float))[:, None]
        sw = self.total[None, :] - starts
        vals = _purepy.window_values(nw, sw, self.j_lo, self.j_hi, self.j_max, self.two_sided)
        self.g = vals.max(axis=0)
        return self.g


class HullBank(_Bank):
    """Unbounded-lookback GLR over convex-hull change-point candidates."""

    def __init__(self, size, eps, two_sided=False, j_max=1e6):
        if not _backend.COMPILED:
            raise RuntimeError("HullBank needs the compiled extension")
        super().__init__(size, eps, two_sided, j_max)
        cap = 16
        self._up_x = np.zeros((size, cap))
        self._up_y = np.zeros((size, cap))
        self._up_len = np.zeros(size, dtype=np.int64)
        lo_cap = cap if self.two_sided else 1
        self._lo_x = np.zeros((size, lo_cap))
        self._lo_y = np.zeros((size, lo_cap))
        self._lo_len = np.zeros(size, dtype=np.int64)

    @staticmethod
    def _grow(x, y):
        pad = np.zeros_like(x)
        return np.concatenate([x, pad], axis=1), np.concatenate([y, pad], axis=1)

    @property
    def hull_sizes(self) -> np.ndarray:
        return self._up_len.copy()

    def update(self, z) -> np.ndarray:
        z = self._check(z)
        if self._up_len.max() >= self._up_x.shape[1]:
            self._up_x, self._up_y = self._grow(self._up_x, self._up_y)
        if self.two_sided and self._lo_len.max() >= self._lo_x.shape[1]:
            self._lo_x, self._lo_y = self._grow(self._lo_x, self._lo_y)
        self.m += 1
        g = np.empty(self.size)
        _backend.kernels.glr_hull_step(
            z, self.total, float(self.m),
            self._up_x, self._up_y, self._up_len,
            self._lo_x, self._lo_y, self._lo_len,
            self.j_lo, self.j_hi, self.j_max, self.two_sided, g,
        )
        self.g = g
        return g


def make_bank(size, eps, two_sided=False, j_max=1e6, window=None):
    """Fastest exact bank available for the requested configuration."""
    if window is None and _backend.COMPILED:
        return HullBank(size, eps, two_sided, j_max)
    return ScanBank(size, eps, two_sided, j_max, window)
