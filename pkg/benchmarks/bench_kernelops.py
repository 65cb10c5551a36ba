"""Benchmark the compiled kernel routines against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernelops.py [--repeats 5]

Times the two hot loops — the anchor Gram matrix and the cross-kernel
sums used when evaluating pattern embeddings on the grid — at the
problem sizes the default pipeline actually hits (a 51x51 anchor grid
and patterns of around 100 points).
"""

import argparse
import time

import numpy as np

from rkhspp import kernelops
from rkhspp import _kernelops_py as fallback


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats; the best run is reported")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    inv_scale = 1.0 / (2.0 * 0.05**2)
    backends = {"numpy": fallback}
    if kernelops.HAVE_COMPILED:
        backends["compiled"] = kernelops
    else:
        print("compiled extension not available; timing fallback only")

    print(f"{'case':<34} " + " ".join(f"{n:>12}" for n in backends)
          + ("  speedup" if len(backends) > 1 else ""))
    cases = []
    for n_anchors in (441, 2601):
        pts = rng.uniform(size=(n_anchors, 2))
        cases.append((f"gram {n_anchors}x{n_anchors}",
                      lambda be, p=pts: be.gram(p, inv_scale)))
    for n_pat, n_anchors in ((100, 441), (100, 2601), (1000, 2601)):
        anchors = rng.uniform(size=(n_anchors, 2))
        atoms = rng.uniform(size=(n_pat, 2))
        coeffs = np.ones(n_pat)
        cases.append((
            f"cross sum {n_pat} pts -> {n_anchors} anchors",
            lambda be, a=anchors, x=atoms, c=coeffs:
                be.cross_kernel_sum(a, x, c, inv_scale),
        ))

    for name, call in cases:
        times = {bn: _time(lambda be=be: call(be), args.repeats)
                 for bn, be in backends.items()}
        row = f"{name:<34} " + " ".join(f"{t * 1e3:>10.2f}ms"
                                        for t in times.values())
        if len(times) > 1:
            row += f"  {times['numpy'] / times['compiled']:>6.2f}x"
        print(row)

    # the two backends must agree to near machine precision
    pts = rng.uniform(size=(300, 2))
    atoms = rng.uniform(size=(80, 2))
    coeffs = rng.uniform(size=80)
    if kernelops.HAVE_COMPILED:
        g_err = np.abs(kernelops.gram(pts, inv_scale)
                       - fallback.gram(pts, inv_scale)).max()
        c_err = np.abs(
            kernelops.cross_kernel_sum(pts, atoms, coeffs, inv_scale)
            - fallback.cross_kernel_sum(pts, atoms, coeffs, inv_scale)
        ).max()
        print(f"max backend disagreement: gram {g_err:.2e}, "
              f"cross sum {c_err:.2e}")


if __name__ == "__main__":
    main()
