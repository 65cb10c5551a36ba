"""Gaussian kernel, pattern embedding, inner products and grid smoothing.

A pattern with points x_1..x_N is embedded as the function
sum_i k(., x_i) in the span of kernel sections.  Inner products on that
span are exact double sums.  ``GridSmoother`` re-expresses an element on
a fixed anchor grid by solving the ridge system
(gamma*N*I + K|_a) beta = b with b_l the element evaluated at anchor
a_l; this is the regularized least-squares fit over the space, whose
minimizer lives in the span of kernels at the anchors.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import kernelops
from .errors import NumericalError, SingularSystemError, ValidationError
from .pointpat import Grid, PointPattern

__all__ = [
    "KernelConfig",
    "RkhsElement",
    "GridElement",
    "kernel_eval",
    "gram_matrix",
    "embed",
    "evaluate",
    "evaluate_many",
    "inner_product",
    "norm",
    "GridSmoother",
    "smooth_to_grid",
    "mean_element",
    "export_field",
    "select_gamma",
]

#: Gram matrices may have eigenvalues as low as -TOL_PSD_PER_N * N.
TOL_PSD_PER_N = 1e-8
#: Residual bound for the ridge solve, relative to ||b||_inf.
TOL_SOLVE_REL = 1e-8


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel bandwidth and functional form.

    form "half" (default) is exp(-d^2 / (2 sigma^2)); form "plain" is
    exp(-d^2 / sigma^2), selectable for sensitivity checks.
    """

    sigma: float
    form: str = "half"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        if self.form not in ("half", "plain"):
            raise ValidationError(f"unknown kernel form {self.form!r}")

    @property
    def inv_scale(self) -> float:
        """Coefficient a in exp(-a * d^2)."""
        if self.form == "half":
            return 1.0 / (2.0 * self.sigma**2)
        return 1.0 / self.sigma**2


@dataclass(frozen=True)
class RkhsElement:
    """Finite kernel expansion sum_i coeffs_i * k(., atoms_i)."""

    atoms: np.ndarray
    coeffs: np.ndarray
    kernel: KernelConfig

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float).reshape(-1, 2)
        coeffs = np.asarray(self.coeffs, dtype=float).ravel()
        if atoms.shape[0] != coeffs.shape[0]:
            raise ValidationError("atoms and coeffs length mismatch")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "coeffs", coeffs)


@dataclass(frozen=True)
class GridElement:
    """Kernel expansion over a fixed anchor grid, coefficients beta."""

    beta: np.ndarray
    grid: Grid
    kernel: KernelConfig

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).ravel()
        if beta.shape[0] != self.grid.n_anchors:
            raise ValidationError("beta length does not match grid size")
        if beta.size and not np.isfinite(beta).all():
            raise ValidationError("non-finite beta entries")
        object.__setattr__(self, "beta", beta)

    def as_element(self) -> RkhsElement:
        return RkhsElement(atoms=self.grid.anchors, coeffs=self.beta, kernel=self.kernel)


def kernel_eval(x, y, cfg: KernelConfig) -> float:
    """Kernel value k(x, y); 1 at x == y, symmetric, in (0, 1]."""
    dx = float(x[0]) - float(y[0])
    dy = float(x[1]) - float(y[1])
    return float(np.exp(-cfg.inv_scale * (dx * dx + dy * dy)))


def gram_matrix(points: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """Kernel matrix over all point pairs; symmetric PSD, unit diagonal."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValidationError("gram_matrix requires at least one point")
    return kernelops.gram(pts, cfg.inv_scale)


def embed(pattern: PointPattern, cfg: KernelConfig) -> RkhsElement:
    """Embed a pattern's counting measure as sum_i k(., x_i)."""
    n = len(pattern)
    return RkhsElement(atoms=pattern.points, coeffs=np.ones(n), kernel=cfg)


def _atoms_coeffs(e: RkhsElement | GridElement) -> tuple[np.ndarray, np.ndarray, KernelConfig]:
    if isinstance(e, GridElement):
        return e.grid.anchors, e.beta, e.kernel
    return e.atoms, e.coeffs, e.kernel


def evaluate_many(e: RkhsElement | GridElement, xs: np.ndarray) -> np.ndarray:
    """Pointwise values of the represented function at each row of xs."""
    atoms, coeffs, cfg = _atoms_coeffs(e)
    xs_ = np.asarray(xs, dtype=float).reshape(-1, 2)
    return kernelops.cross_kernel_sum(xs_, atoms, coeffs, cfg.inv_scale)


def evaluate(e: RkhsElement | GridElement, x) -> float:
    """Value of the represented function at a single point (exact sum)."""
    return float(evaluate_many(e, np.asarray(x, dtype=float).reshape(1, 2))[0])


def inner_product(e1: RkhsElement | GridElement, e2: RkhsElement | GridElement) -> float:
    """Exact double-sum inner product sum_ij a_i b_j k(x_i, y_j)."""
    a1, c1, k1 = _atoms_coeffs(e1)
    a2, c2, k2 = _atoms_coeffs(e2)
    if k1 != k2:
        raise ValidationError(f"kernel mismatch: {k1} vs {k2}")
    if a1.shape[0] == 0 or a2.shape[0] == 0:
        return 0.0
    return float(c1 @ kernelops.cross_kernel_sum(a1, a2, c2, k1.inv_scale))


def norm(e: RkhsElement | GridElement) -> float:
    """Induced norm; the squared norm is clamped at 0 against round-off."""
    return float(np.sqrt(max(inner_product(e, e), 0.0)))


class GridSmoother:
    """Factored ridge system for smoothing many elements onto one grid.

    The Cholesky factor of (gamma*N*I + K|_a) is computed once; each
    ``smooth`` call is then a pair of triangular solves.
    """

    def __init__(self, grid: Grid, cfg: KernelConfig, gamma: float,
                 tol_solve_rel: float = TOL_SOLVE_REL):
        if gamma < 0:
            raise ValidationError(f"gamma must be >= 0, got {gamma}")
        self.grid = grid
        self.kernel = cfg
        self.gamma = float(gamma)
        self.tol_solve_rel = tol_solve_rel
        n = grid.n_anchors
        self._system = gram_matrix(grid.anchors, cfg) + gamma * n * np.eye(n)
        try:
            self._cho = cho_factor(self._system)
        except LinAlgError as exc:
            raise SingularSystemError(
                f"ridge system singular at gamma={gamma} on {n}-anchor grid"
            ) from exc

    def smooth(self, e: RkhsElement) -> GridElement:
        if e.kernel != self.kernel:
            raise ValidationError("element kernel does not match smoother kernel")
        b = evaluate_many(e, self.grid.anchors)
        beta = cho_solve(self._cho, b)
        resid = np.abs(self._system @ beta - b).max()
        tol = self.tol_solve_rel * max(np.abs(b).max(), 1.0)
        if resid > tol:
            raise NumericalError(
                f"ridge solve residual {resid:.3e} exceeds tolerance {tol:.3e}"
            )
        return GridElement(beta=beta, grid=self.grid, kernel=self.kernel)


def smooth_to_grid(e: RkhsElement, grid: Grid, gamma: float) -> GridElement:
    """One-shot version of :class:`GridSmoother` for a single element."""
    return GridSmoother(grid, e.kernel, gamma).smooth(e)


def mean_element(elements: list[GridElement]) -> GridElement:
    """Coefficient-wise mean of grid elements (vector-space mean)."""
    if not elements:
        raise ValidationError("mean of empty element list")
    first = elements[0]
    for e in elements[1:]:
        if e.grid is not first.grid and not np.array_equal(e.grid.anchors, first.grid.anchors):
            raise ValidationError("elements on different grids")
        if e.kernel != first.kernel:
            raise ValidationError("elements with different kernels")
    beta = np.mean([e.beta for e in elements], axis=0)
    return GridElement(beta=beta, grid=first.grid, kernel=first.kernel)


def export_field(e: RkhsElement | GridElement, grid: Grid, path: str | os.PathLike) -> None:
    """Write the function's values over the grid as CSV ``x,y,value``."""
    values = evaluate_many(e, grid.anchors)
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "value"])
        for (x, y), v in zip(grid.anchors, values):
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(v))])
    os.replace(tmp, path)


def select_gamma(grid: Grid, cfg: KernelConfig, max_cond: float = 1e12) -> float:
    """Smallest gamma on a 10-per-decade grid keeping the system condition
    number below ``max_cond``.

    The printed selection rule "minimum value making the matrix
    invertible" is ill-posed in floating point; a condition-number cap
    is the usable surrogate.
    """
    eigvals = np.linalg.eigvalsh(gram_matrix(grid.anchors, cfg))
    lo, hi = eigvals[0], eigvals[-1]
    n = grid.n_anchors
    for exponent in np.arange(-160, 41) / 10.0:  # 1e-16 .. 1e4
        gamma = 10.0**exponent
        cond = (gamma * n + hi) / (gamma * n + lo)
        if cond > 0 and cond < max_cond:
            return float(gamma)
    raise NumericalError(f"no gamma on the search grid meets cond < {max_cond:g}")
