"""Scratch: calibrate sorting options in numba."""
import sys, time
sys.path.insert(0, "src")
import numpy as np
from numba import njit

n = 11000
rng = np.random.default_rng(0)

@njit(cache=True)
def bench_npsort(data, reps):
    acc = 0.0
    for r in range(reps):
        v = data[r % 50].copy()
        v.sort()
        acc += v[0]
    return acc

@njit(cache=True)
def bench_npsort_u64(data, reps):
    acc = 0
    for r in range(reps):
        v = data[r % 50].copy()
        v.sort()
        acc += v[0]
    return acc

@njit(cache=True)
def bench_argsort(data, reps):
    acc = 0
    for r in range(reps):
        o = np.argsort(data[r % 50], kind="mergesort")
        acc += o[0]
    return acc

dataf = rng.normal(size=(50, n))
datau = rng.integers(0, 2**63, size=(50, n)).astype(np.uint64)

bench_npsort(dataf, 1); bench_npsort_u64(datau, 1); bench_argsort(dataf, 1)
for name, fn, data in (("np.sort f64", bench_npsort, dataf),
                       ("np.sort u64", bench_npsort_u64, datau),
                       ("np.argsort merge", bench_argsort, dataf)):
    t0 = time.time(); fn(data, 200); dt = (time.time() - t0) / 200
    print(f"{name}: {dt*1e6:.0f} us, {dt/n*1e9:.1f} ns/elem")
