"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--cells 400000] [--nx 1001]
"""
import argparse
import timeit

import numpy as np

from wavedelay import _kernels_py

try:
    from wavedelay import _kernels
except ImportError:
    _kernels = None


def extend_case(n, segs):
    rng = np.random.default_rng(0)
    a = np.zeros(segs * n)
    a[:n] = rng.normal(size=n)
    lag = rng.choice([2 * n, 4 * n], size=(segs - 1) * n).astype(np.int64)

    def run(mod):
        b = a.copy()
        mod.extend_cells(b, n, segs * n, n, -0.2, 5 * n, lag)
        return b

    return run


def leapfrog_case(nx, periods):
    x = np.linspace(0, 1, nx)
    steps = (nx - 1) * periods
    u0 = np.sin(np.pi * x / 2)
    u1 = u0.copy()
    r = 1.0  # unit CFL
    lag = np.full(steps + 1, 4.0 * (nx - 1))
    rec = np.array([steps - 1], dtype=np.int64)

    def run(mod):
        out_u = np.zeros((1, nx))
        out_vt = np.zeros((1, nx))
        ring = np.zeros(4 * (nx - 1) + 2)
        mod.leapfrog(u0, u1, r * r, -0.2 * r, r * r * 2 / (nx - 1) * -0.2, 1 / (nx - 1),
                     4 * (nx - 1), lag, ring, 0.0, steps, rec, out_u, out_vt)
        return out_u

    return run, steps


def best(fn, mod, repeat):
    return min(timeit.repeat(lambda: fn(mod), number=1, repeat=repeat))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--cells", type=int, default=400_000)
    p.add_argument("--nx", type=int, default=1001)
    p.add_argument("--periods", type=int, default=10)
    args = p.parse_args()

    n = 512
    ext = extend_case(n, max(2, args.cells // n))
    lf, steps = leapfrog_case(args.nx, args.periods)
    cases = [(f"extend_cells ({args.cells} cells)", ext),
             (f"leapfrog ({args.nx} nodes x {steps} steps)", lf)]

    print(f"{'kernel':<42}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for name, fn in cases:
        t_py = best(fn, _kernels_py, args.repeat)
        if _kernels is None:
            print(f"{name:<42}{t_py:>12.4f}{'n/a':>14}{'':>10}")
            continue
        t_c = best(fn, _kernels, args.repeat)
        same = np.array_equal(fn(_kernels_py), fn(_kernels))
        print(f"{name:<42}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>9.1f}x" + ("" if same else "  MISMATCH"))


if __name__ == "__main__":
    main()
