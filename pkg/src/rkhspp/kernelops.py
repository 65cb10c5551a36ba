"""Dispatch between the compiled kernel core and the numpy fallback.

The compiled extension is optional; ``HAVE_COMPILED`` reports which
backend is active.  Both backends are kept behaviourally identical (see
``benchmarks/bench_kernelops.py`` and the cross-checks in the tests).
"""

from __future__ import annotations

import numpy as np

from . import _kernelops_py

try:
    from . import _kernelops  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:
    _kernelops = None
    HAVE_COMPILED = False

_impl = _kernelops if HAVE_COMPILED else _kernelops_py

__all__ = ["HAVE_COMPILED", "gram", "cross_kernel_sum"]


def _c(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def gram(points: np.ndarray, inv_scale: float) -> np.ndarray:
    """Matrix exp(-inv_scale * ||p_i - p_j||^2) over all point pairs."""
    pts = _c(points).reshape(-1, 2)
    if pts.shape[0] == 0:
        return np.zeros((0, 0))
    return _impl.gram(pts, float(inv_scale))


def cross_kernel_sum(
    xs: np.ndarray, atoms: np.ndarray, coeffs: np.ndarray, inv_scale: float
) -> np.ndarray:
    """Weighted kernel sums sum_j coeffs_j exp(-inv_scale*||x_i - atom_j||^2)."""
    xs_ = _c(xs).reshape(-1, 2)
    atoms_ = _c(atoms).reshape(-1, 2)
    coeffs_ = _c(coeffs).ravel()
    if atoms_.shape[0] != coeffs_.shape[0]:
        raise ValueError("atoms and coeffs length mismatch")
    if atoms_.shape[0] == 0:
        return np.zeros(xs_.shape[0])
    return _impl.cross_kernel_sum(xs_, atoms_, coeffs_, float(inv_scale))
