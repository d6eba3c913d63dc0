"""Compiled vs pure-numpy kernels.

Times each kernel pair in ``ernot._accel`` on representative inputs and
checks that both backends agree.  The library picks one at import time from
ERNOT_USE_NUMBA; here both are called directly.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from ernot import _accel


def spd_batch(rng, n):
    a = rng.standard_normal((n, 3, 3))
    return a @ np.swapaxes(a, -1, -2) + 0.1 * np.eye(3)


def uniform_transport(rng, n):
    w = np.full(n, 1.0 / n)
    return w, w.copy(), rng.random((n, n))


def cases(rng):
    mats = spd_batch(rng, 40_000)
    logits = rng.standard_normal((1024, 1024)) * 20.0
    logw = np.full(1024, -np.log(1024.0))
    small_a, small_b, small_c = uniform_transport(rng, 24)
    a, b, c = uniform_transport(rng, 200)
    return [
        ("sym3_eigh 40000", _accel.sym3_eigh_numba, _accel.sym3_eigh_numpy, (mats,)),
        ("lse_rows 1024x1024", _accel.lse_rows_numba, _accel.lse_rows_numpy, (logits, logw)),
        ("simplex 24x24", _accel.transport_simplex_numba, _accel.transport_simplex_numpy,
         (small_a, small_b, small_c, 10_000, 1e-13)),
        ("simplex 200x200", _accel.transport_simplex_numba, None, (a, b, c, 100_000, 1e-13)),
    ]


def agree(name, x, y):
    if name.startswith("sym3_eigh"):
        # eigenvectors are sign-ambiguous; compare eigenvalues and reconstructions
        (w1, v1), (w2, v2) = x, y
        r1 = np.einsum("...ik,...k,...jk->...ij", v1, w1, v1)
        r2 = np.einsum("...ik,...k,...jk->...ij", v2, w2, v2)
        return max(np.abs(w1 - w2).max(), np.abs(r1 - r2).max())
    if name.startswith("simplex"):
        return abs(x[0] - y[0])
    return np.abs(x - y).max()


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)

    print(f"{'kernel':22s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, fast, slow, fargs in cases(rng):
        fast(*fargs)  # compile
        t_fast = min(timeit.repeat(lambda: fast(*fargs), number=1, repeat=args.repeat))
        if slow is None:
            # the interpreted simplex takes minutes at this size
            print(f"{name:22s} {t_fast:10.4f} {'skipped':>10s}")
            continue
        t_slow = min(timeit.repeat(lambda: slow(*fargs), number=1, repeat=max(1, args.repeat // 2)))
        diff = agree(name, fast(*fargs), slow(*fargs))
        print(f"{name:22s} {t_fast:10.4f} {t_slow:10.4f} {t_slow / t_fast:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
