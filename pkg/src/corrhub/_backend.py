"""Pick the compiled kernels when importable, else the NumPy versions.

Set ``CORRHUB_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the backend-equivalence tests).
"""

import os

from corrhub import _purepy

kernels = None
if not os.environ.get("CORRHUB_PURE_PYTHON"):
    try:
        from corrhub import _kernels as kernels
    except ImportError:
        kernels = None

COMPILED = kernels is not None
NAME = "cython" if COMPILED else "numpy"

reg_inc_beta_array = kernels.reg_inc_beta_array if COMPILED else _purepy.reg_inc_beta_array
