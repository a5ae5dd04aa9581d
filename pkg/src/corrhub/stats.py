"""Batching of the vector stream and sample-correlation summary statistics."""

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np


class DegenerateColumnError(ValueError):
    """A column of a batch has zero sample variance."""

    def __init__(self, column: int, batch_index: int | None = None):
        self.column = column
        self.batch_index = batch_index
        where = f" in batch {batch_index}" if batch_index is not None else ""
        super().__init__(f"column {column + 1} has zero sample variance{where}")


class StreamFormatError(ValueError):
    """Stream vectors of inconsistent length."""

    def __init__(self, index: int, expected: int, got: int):
        self.index = index
        super().__init__(f"stream vector {index} has length {got}, expected {expected}")


@dataclass(frozen=True)
class DataMatrix:
    """One n x p batch; rows are consecutive stream vectors."""

    values: np.ndarray
    batch_index: int

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SummarySample:
    v: np.ndarray
    u: float
    batch_index: int


class Batcher:
    """Incremental batching: feed vectors in any chunking, get full batches out.

    A trailing partial batch stays pending until it is completed.
    """

    def __init__(self, n: int, p: int | None = None):
        if n < 2:
            raise ValueError(f"batch size must be at least 2, got {n}")
        self.n = n
        self.p = p
        self._pending: list[np.ndarray] = []
        self._seen = 0
        self._emitted = 0

    @property
    def pending(self) -> int:
        return len(self._pending)

    def push(self, vector) -> DataMatrix | None:
        vec = np.asarray(vector, dtype=float).reshape(-1)
        self._seen += 1
        if self.p is None:
            self.p = vec.size
        elif vec.size != self.p:
            raise StreamFormatError(self._seen, self.p, vec.size)
        self._pending.append(vec)
        if len(self._pending) < self.n:
            return None
        self._emitted += 1
        out = DataMatrix(np.vstack(self._pending), self._emitted)
        self._pending = []
        return out

    def extend(self, vectors: Iterable) -> Iterator[DataMatrix]:
        for vec in vectors:
            out = self.push(vec)
            if out is not None:
                yield out


def batch(stream: Iterable, n: int) -> Iterator[DataMatrix]:
    """Split a stream of length-p vectors into consecutive n x p matrices."""
    return Batcher(n).extend(stream)


def _normalized_scores(values: np.ndarray, batch_index: int | None = None) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("data matrix must be 2-D with at least two rows")
    centered = x - x.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    scale = np.abs(x).max(axis=0)
    # relative test: a column that is constant up to rounding has no variance
    flat = norms <= 1e-14 * np.maximum(scale, 1e-300) * np.sqrt(x.shape[0])
    if flat.any():
        raise DegenerateColumnError(int(np.flatnonzero(flat)[0]), batch_index)
    return centered / norms


def _values(x) -> tuple[np.ndarray, int | None]:
    if isinstance(x, DataMatrix):
        return x.values, x.batch_index
    return np.asarray(x, dtype=float), None


def sample_correlation(x) -> np.ndarray:
    """Pearson sample correlation matrix of the columns, clamped to [-1, 1]."""
    values, idx = _values(x)
    z = _normalized_scores(values, idx)
    r = z.T @ z
    np.clip(r, -1.0, 1.0, out=r)
    np.fill_diagonal(r, 1.0)
    return r


def local_stats(r: np.ndarray) -> np.ndarray:
    """v[k] = max over i != k of |r[k, i]|."""
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] < 2:
        raise ValueError("need a square correlation matrix with p >= 2")
    a = np.abs(r)
    np.fill_diagonal(a, -np.inf)
    return a.max(axis=1)


def global_stat(v) -> float:
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("global statistic of an empty vector")
    return float(v.max())


def sample_degree(r: np.ndarray, rho: float) -> np.ndarray:
    """d[k] = number of i != k with |r[k, i]| >= rho."""
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] < 2:
        raise ValueError("need a square correlation matrix with p >= 2")
    hits = np.abs(r) >= rho
    np.fill_diagonal(hits, False)
    return hits.sum(axis=1)


def local_stats_blocked(x, block: int = 512) -> np.ndarray:
    """Same as ``local_stats(sample_correlation(x))`` in O(n p) memory.

    Columns are scanned in blocks of ``block`` so that only a
    ``block x block`` slab of the correlation matrix exists at a time.
    """
    values, idx = _values(x)
    z = _normalized_scores(values, idx)
    p = z.shape[1]
    if p < 2:
        raise ValueError("need p >= 2")
    v = np.zeros(p)
    for lo in range(0, p, block):
        hi = min(lo + block, p)
        left = z[:, lo:hi]
        for lo2 in range(lo, p, block):
            hi2 = min(lo2 + block, p)
            slab = np.abs(left.T @ z[:, lo2:hi2])
            if lo2 == lo:
                np.fill_diagonal(slab, 0.0)
            np.maximum(v[lo:hi], slab.max(axis=1), out=v[lo:hi])
            np.maximum(v[lo2:hi2], slab.max(axis=0), out=v[lo2:hi2])
    np.clip(v, 0.0, 1.0, out=v)
    return v


def summarize(x, block: int | None = None) -> SummarySample:
    """Local maxima V_1..V_p and their global maximum U for one batch.

    The full correlation matrix is formed unless ``block`` is given (or p is
    large), in which case the blocked scan is used.
    """
    values, idx = _values(x)
    p = values.shape[1]
    if block is not None or p > 2048:
        v = local_stats_blocked(x, block or 512)
    else:
        v = local_stats(sample_correlation(x))
    return SummarySample(v=v, u=global_stat(v), batch_index=idx if idx is not None else 0)
