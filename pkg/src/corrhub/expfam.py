"""Exponential-family limit laws of the local (V_k) and global (U) statistics.

Both families are one-parameter exponential families whose sufficient
statistic is exponential: if V ~ f_V(.; J) then (p-1) P_0(V) ~ Exp(J), and
if U ~ g(.; theta) then (D/2) T(U) ~ Exp(theta).  ``LocalFamily.scale`` and
``GlobalFamily.scale`` map P_0 to that statistic.
"""

import math
from dataclasses import dataclass

import numpy as np

from corrhub.specialfn import ln_beta, p0, shape_params


def _check_dims(p, n):
    if p < 2:
        raise ValueError(f"dimension p must be at least 2, got {p}")
    if n <= 4:
        raise ValueError(f"batch size n must exceed 4, got {n}")


@dataclass(frozen=True)
class LocalFamily:
    """f_V(y; J) = J C(p,n) (1-y^2)^((n-4)/2) exp(-(p-1) J P_0(y))."""

    p: int
    n: int

    def __post_init__(self):
        _check_dims(self.p, self.n)

    @property
    def log_c(self) -> float:
        return math.log(2.0 * (self.p - 1)) - ln_beta(*shape_params(self.n))

    @property
    def scale(self) -> float:
        """Multiplier taking P_0(V) to the Exp(J) sufficient statistic."""
        return float(self.p - 1)

    def stat(self, y):
        return self.scale * p0(y, self.n)


@dataclass(frozen=True)
class GlobalFamily:
    """g(u; theta) = (D theta / 2) (1-u^2)^((n-4)/2) exp(-(D/2) theta T(u)).

    D = 2 p (p-1) / B((n-2)/2, 1/2), so (D/2) T(u) = p (p-1) P_0(u) / 2.
    """

    p: int
    n: int

    def __post_init__(self):
        _check_dims(self.p, self.n)

    @property
    def log_d(self) -> float:
        return math.log(2.0 * self.p * (self.p - 1)) - ln_beta(*shape_params(self.n))

    @property
    def scale(self) -> float:
        """Multiplier taking P_0(U) to (D/2) T(U)."""
        return self.p * (self.p - 1) / 2.0

    def stat(self, u):
        return self.scale * p0(u, self.n)


def _positive(name, x):
    if not x > 0:
        raise ValueError(f"{name} must be positive, got {x!r}")


def _open_unit(name, y):
    arr = np.asarray(y, dtype=float)
    if np.any(~(arr > 0.0)) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in (0, 1]; the law has an atom at 0")
    return arr


def _logpdf(y, param, log_const, scale, fam):
    arr = _open_unit("y", y)
    with np.errstate(divide="ignore"):
        shape_term = 0.5 * (fam.n - 4) * np.log1p(-arr * arr)
    out = math.log(param) + log_const + shape_term - param * scale * p0(arr, fam.n)
    return float(out) if np.ndim(out) == 0 else out


def logpdf_local(y, J: float, fam: LocalFamily):
    """Log density of V; -inf at y = 1, where the density vanishes."""
    _positive("J", J)
    return _logpdf(y, J, fam.log_c, fam.scale, fam)


def logpdf_global(u, theta: float, fam: GlobalFamily):
    _positive("theta", theta)
    return _logpdf(u, theta, fam.log_d - math.log(2.0), fam.scale, fam)


def _loglr(y, param, fam):
    _positive("parameter", param)
    z = fam.stat(y)
    out = math.log(param) - (param - 1.0) * z
    return float(out) if np.ndim(out) == 0 else out


def loglr_local(y, J: float, fam: LocalFamily):
    """log f_V(y; J) / f_V(y; 1); finite on all of [0, 1]."""
    return _loglr(y, J, fam)


def loglr_global(u, theta: float, fam: GlobalFamily):
    return _loglr(u, theta, fam)


def cdf_local(rho, J: float, fam: LocalFamily):
    """P(V <= rho) = exp(-(p-1) J P_0(rho))."""
    _positive("J", J)
    out = np.exp(-J * fam.stat(rho))
    return float(out) if np.ndim(out) == 0 else out


def cdf_global(u, theta: float, fam: GlobalFamily):
    _positive("theta", theta)
    out = np.exp(-theta * fam.stat(u))
    return float(out) if np.ndim(out) == 0 else out


def _mle(values, scale):
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValueError("MLE needs at least one observation")
    mean = arr.mean()
    if mean <= 0.0:
        return math.inf
    return 1.0 / (scale * mean)


def mle_local(p0_values, fam: LocalFamily) -> float:
    """J-hat = 1 / ((p-1) mean P_0(V_k(i)))."""
    return _mle(p0_values, fam.scale)


def mle_global(t_values, fam: GlobalFamily) -> float:
    """theta-hat = 1 / ((D/2) mean T(U(i))), taking T values as input."""
    arr = np.asarray(t_values, dtype=float)
    half_beta = 0.5 * math.exp(ln_beta(*shape_params(fam.n)))
    return _mle(arr / half_beta, fam.scale)


def kl_divergence(x: float) -> float:
    """KL(f(.; x) || f(.; 1)) = ln x - 1 + 1/x for either family."""
    _positive("parameter", x)
    return math.log(x) - 1.0 + 1.0 / x


kl_local = kl_divergence
kl_global = kl_divergence


def p0_inverse(target, n: int, tol: float = 1e-12) -> np.ndarray:
    """Solve P_0(rho) = target for rho by bisection (P_0 is decreasing).

    Targets >= 1 map to 0 (the atom of the law); targets <= 0 map to 1.
    """
    t = np.atleast_1d(np.asarray(target, dtype=float))
    lo = np.zeros_like(t)
    hi = np.ones_like(t)
    # interval halves per sweep; 60 sweeps reach 1e-18 > tol
    sweeps = max(1, int(math.ceil(math.log2(1.0 / tol))) + 2)
    for _ in range(sweeps):
        mid = 0.5 * (lo + hi)
        above = p0(mid, n) > t
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    out = 0.5 * (lo + hi)
    out[t >= 1.0] = 0.0
    out[t <= 0.0] = 1.0
    return out


def _sample(param, fam, size, rng):
    _positive("parameter", param)
    rng = np.random.default_rng(rng)
    z = rng.exponential(1.0 / param, size=size)
    return p0_inverse(z / fam.scale, fam.n).reshape(np.shape(z))


def sample_local(J: float, fam: LocalFamily, size, rng=None) -> np.ndarray:
    """Exact draws from f_V(.; J) by inverting P_0 at Z / (p-1), Z ~ Exp(J)."""
    return _sample(J, fam, size, rng)


def sample_global(theta: float, fam: GlobalFamily, size, rng=None) -> np.ndarray:
    return _sample(theta, fam, size, rng)
