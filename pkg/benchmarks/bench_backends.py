#!/usr/bin/env python3
"""Time the compiled integration kernel against its pure NumPy twin.

Both kernels evaluate the same shifted-lattice means for the normal
rectangle integrand, so on identical inputs they must agree to float
rounding; this script checks that while it times them.  Run from the
repository root:

    python3 benchmarks/bench_backends.py

The active backend for library calls is reported at the end; it can be
forced with TRENDCOMP_BACKEND=cython|python before import.
"""

import time

import numpy as np

from trendcomp import _genz_py
from trendcomp.mvn import BACKEND, _SQRT_PRIMES, _reorder_cholesky

try:
    from trendcomp import _genz
except ImportError:
    _genz = None

REPEATS = 5
N_SHIFTS = 12


def make_case(rng, m, npts):
    A = rng.standard_normal((m, m + 2))
    S = A @ A.T
    d = np.sqrt(np.diag(S))
    R = S / np.outer(d, d)
    L, b = _reorder_cholesky(R, np.full(m, 1.5))
    sqp = np.ascontiguousarray(_SQRT_PRIMES[: m - 1])
    shifts = rng.random((N_SHIFTS, m - 1))
    return L, b, sqp, shifts, npts


def best_time(kernel, case):
    best = np.inf
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        kernel.qmc_shift_means(*case)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(17)
    print(f"{'dim':>4} {'points':>8} {'python ms':>10} {'cython ms':>10} "
          f"{'speedup':>8} {'max|diff|':>10}")
    for m in (2, 3, 4, 6, 8):
        for npts in (1024, 16384):
            case = make_case(rng, m, npts)
            t_py = best_time(_genz_py, case)
            if _genz is None:
                print(f"{m:>4} {npts:>8} {t_py * 1e3:>10.3f} {'-':>10} "
                      f"{'-':>8} {'-':>10}")
                continue
            t_cy = best_time(_genz, case)
            diff = float(
                np.max(np.abs(_genz.qmc_shift_means(*case)
                              - _genz_py.qmc_shift_means(*case)))
            )
            print(f"{m:>4} {npts:>8} {t_py * 1e3:>10.3f} {t_cy * 1e3:>10.3f} "
                  f"{t_py / t_cy:>8.1f} {diff:>10.2e}")
    if _genz is None:
        print("\ncompiled kernel not built; python twin only")
    print(f"\nactive backend: {BACKEND}")


if __name__ == "__main__":
    main()
