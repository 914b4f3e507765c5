"""Timing comparison of the JIT and pure-numpy builds of every hot kernel.

Run as ``python3 benchmarks/bench_kernels.py [--repeats N]``.  Each kernel is
timed on a representative workload with both builds forced explicitly, so the
result is independent of the ``SSMC_NUMBA`` environment switch; the JIT build
is warmed up once before timing so compilation is excluded.
"""

import argparse
import time

import numpy as np

from ssmc import _accel, kernels


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _workloads(rng):
    sym = rng.standard_normal((120, 120))
    sym = (sym + sym.T) / 2.0

    rect = rng.standard_normal((96, 64)) + 1j * rng.standard_normal((96, 64))

    f, n, m = 33, 64, 64
    base = rng.standard_normal((f, n, n)) + 1j * rng.standard_normal((f, n, n))
    hpd = np.einsum("fij,fkj->fik", base, base.conj()) + 4.0 * n * np.eye(n)[None]
    chol = np.linalg.cholesky(hpd)
    rhs = rng.standard_normal((f, n, m)) + 1j * rng.standard_normal((f, n, m))

    stack = rng.standard_normal((33, 200, 200)) + 1j * rng.standard_normal((33, 200, 200))
    weights = np.full(33, 2.0)
    weights[0] = 1.0

    pts = np.vstack(
        [rng.normal(c, 0.4, (400, 12)) for c in range(6)]
    )
    c0 = pts[rng.choice(pts.shape[0], 6, replace=False)]

    return [
        ("jacobi_eigh 120x120", lambda nb: kernels.jacobi_eigh(sym, use_numba=nb)),
        ("jacobi_svd 96x64 cplx", lambda nb: kernels.jacobi_svd(rect, use_numba=nb)),
        (
            "cho_solve 33x64x64",
            lambda nb: kernels.cho_solve_batched(chol, rhs, use_numba=nb),
        ),
        (
            "scale_tubes 33x200x200",
            lambda nb: kernels.scale_tubes(stack, weights, 1.0 / 64, 0.3, use_numba=nb),
        ),
        (
            "scale_rows 33x200x200",
            lambda nb: kernels.scale_rows(stack, weights, 1.0 / 64, 0.3, use_numba=nb),
        ),
        ("lloyd 2400x12 k=6", lambda nb: kernels.lloyd(pts, c0, 50, use_numba=nb)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3, help="timed repeats, best kept")
    args = parser.parse_args()

    if not _accel.HAVE_NUMBA:
        print("numba unavailable: both columns run the numpy build")
    rng = np.random.default_rng(0)
    rows = []
    for name, run in _workloads(rng):
        run(True)  # warm-up: trigger compilation outside the timed region
        t_jit = _time(lambda: run(True), args.repeats)
        t_py = _time(lambda: run(False), args.repeats)
        rows.append((name, t_py, t_jit))

    width = max(len(name) for name, _, _ in rows)
    print(f"{'kernel':<{width}}  {'numpy (s)':>10}  {'numba (s)':>10}  {'speedup':>8}")
    for name, t_py, t_jit in rows:
        print(f"{name:<{width}}  {t_py:>10.4f}  {t_jit:>10.4f}  {t_py / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
