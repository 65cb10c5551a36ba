"""Pure-numpy fallback for the compiled kernels in ``_kernelops``."""

import numpy as np
from scipy.spatial.distance import cdist


def gram(pts, inv_scale):
    """Symmetric matrix exp(-inv_scale * ||p_i - p_j||^2)."""
    d2 = cdist(pts, pts, "sqeuclidean")
    out = np.exp(-inv_scale * d2)
    np.fill_diagonal(out, 1.0)
    return out


def cross_kernel_sum(xs, atoms, coeffs, inv_scale):
    """For each row x of xs: sum_j coeffs[j] * exp(-inv_scale*||x - atom_j||^2)."""
    if atoms.shape[0] == 0:
        return np.zeros(xs.shape[0])
    d2 = cdist(xs, atoms, "sqeuclidean")
    return np.exp(-inv_scale * d2) @ coeffs
