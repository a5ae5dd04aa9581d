"""Special functions behind the limit densities of the correlation statistics.

Everything here is vectorised over its first argument and returns a Python
float for scalar input.  The incomplete beta function is evaluated by a
continued fraction (compiled when the extension is built).
"""

import math

import numpy as np

from corrhub import _backend


def _check_shape(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be finite and positive, got {value!r}")


def ln_beta(a: float, b: float) -> float:
    """Natural log of the complete beta function B(a, b)."""
    _check_shape("a", a)
    _check_shape("b", b)
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _as_unit_interval(name, values):
    arr = np.asarray(values, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def _finish(arr, scalar):
    return float(arr.reshape(-1)[0]) if scalar else arr


def reg_inc_beta(x, a: float, b: float):
    """Regularized incomplete beta function I_x(a, b).

    The fraction is evaluated directly for ``x < (a+1)/(a+b+2)`` and through
    ``I_x(a, b) = 1 - I_{1-x}(b, a)`` otherwise.
    """
    lnb = ln_beta(a, b)
    arr = _as_unit_interval("x", x)
    scalar = arr.ndim == 0
    flat = np.ascontiguousarray(arr, dtype=float).reshape(-1)
    out = np.empty_like(flat)
    bad = _backend.reg_inc_beta_array(flat, float(a), float(b), lnb, out)
    if bad:
        raise FloatingPointError(f"incomplete beta continued fraction did not converge for {bad} value(s)")
    np.clip(out, 0.0, 1.0, out=out)
    return _finish(out.reshape(arr.shape), scalar)


def shape_params(n: int) -> tuple[float, float]:
    """Beta shape parameters ((n-2)/2, 1/2) of the null correlation law."""
    if n <= 2:
        raise ValueError(f"batch size must exceed 2, got {n}")
    return (n - 2) / 2.0, 0.5


def p0(rho, n: int):
    """Null tail weight P_0(rho) = I_{1-rho^2}((n-2)/2, 1/2).

    For a batch of ``n`` independent Gaussian rows this is exactly
    P(|r| >= rho) for one sample correlation coefficient.  Operating batch
    sizes are n > 4; n in (2, 4] is accepted for diagnostics.
    """
    a, b = shape_params(n)
    r = _as_unit_interval("rho", rho)
    x = (1.0 - r) * (1.0 + r)
    return reg_inc_beta(x, a, b)


def t_integral(u, n: int):
    """T(u) = integral of (1 - s^2)^((n-4)/2) over [u, 1].

    Computed as B((n-2)/2, 1/2) * P_0(u) / 2 so that the global and local
    densities share one kernel.
    """
    a, b = shape_params(n)
    half_beta = 0.5 * math.exp(ln_beta(a, b))
    val = p0(u, n)
    return half_beta * val
