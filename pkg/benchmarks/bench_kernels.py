"""Compare the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the incomplete beta over a large array and one GLR bank step sequence
(p = 100 detectors, 2000 batches) for each backend.  The GLR comparison is
HullBank (compiled, unbounded lookback) against ScanBank (NumPy, exhaustive
scan), which is what the detector picks in each case.
"""

import argparse
import timeit

import numpy as np

from corrhub import _backend, _purepy
from corrhub._glr import HullBank, ScanBank
from corrhub.specialfn import ln_beta


def bench_betainc(impl, repeat):
    x = np.random.default_rng(0).random(200_000)
    out = np.empty_like(x)
    lb = ln_beta(4.0, 0.5)
    return min(timeit.repeat(lambda: impl(x, 4.0, 0.5, lb, out), number=1, repeat=repeat))


def bench_bank(cls, repeat, p=100, steps=2000):
    z = np.random.default_rng(1).exponential(1.0, (steps, p))

    def run():
        bank = cls(p, 1.0)
        for row in z:
            bank.update(row)

    return min(timeit.repeat(run, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rows = [("reg_inc_beta 2e5 points", "numpy", bench_betainc(_purepy.reg_inc_beta_array, args.repeat))]
    rows.append(("GLR bank p=100 x 2000", "numpy scan", bench_bank(ScanBank, args.repeat)))
    if _backend.COMPILED:
        rows.insert(1, ("reg_inc_beta 2e5 points", "cython",
                        bench_betainc(_backend.kernels.reg_inc_beta_array, args.repeat)))
        rows.append(("GLR bank p=100 x 2000", "cython hull", bench_bank(HullBank, args.repeat)))
    else:
        print("compiled extension not available; showing the fallback only")
    for name, backend, secs in rows:
        print(f"{name:26s} {backend:12s} {secs * 1e3:10.1f} ms")


if __name__ == "__main__":
    main()
