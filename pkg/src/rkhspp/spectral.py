"""Spectral basis of the anchor Gram matrix and feature extraction.

Eigenpairs (l_q, v_q) of K|_a give the finite-dimensional coordinates
mu_q = sqrt(l_q) * (v_q . beta) of a grid element; truncating at r keeps
the best rank-r approximation in the induced norm.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, NumericalError, ValidationError
from .kernels import GridElement, KernelConfig, gram_matrix
from .pointpat import Grid, Window, make_grid

__all__ = [
    "SpectralBasis",
    "FeatureVector",
    "spectral_basis",
    "project",
    "feature_inner",
    "reconstruct",
    "basis_cache_key",
    "save_basis",
    "load_basis",
    "features_to_csv",
    "features_from_csv",
]

#: Eigenvalues below RANK_TOL_REL * l_1 count as zero.
RANK_TOL_REL = 1e-10


@dataclass(frozen=True)
class SpectralBasis:
    """Descending eigenvalues and orthonormal eigenvectors of K|_a.

    ``rank`` is the count of eigenvalues above the rank tolerance;
    eigenvalues below it are clamped to exactly 0.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns are v_q
    grid: Grid
    kernel: KernelConfig
    rank: int

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class FeatureVector:
    """Truncated spectral coefficients of one pattern."""

    mu: np.ndarray
    basis: SpectralBasis
    label: str | None = None
    id: str | None = None

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).ravel()
        if not np.isfinite(mu).all():
            raise ValidationError("non-finite feature entries")
        object.__setattr__(self, "mu", mu)

    @property
    def r(self) -> int:
        return self.mu.shape[0]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the first non-negligible component is positive."""
    v = vectors.copy()
    for q in range(v.shape[1]):
        col = v[:, q]
        idx = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
        if idx.size and col[idx[0]] < 0:
            v[:, q] = -col
    return v


def spectral_basis(grid: Grid, cfg: KernelConfig,
                   rank_tol: float | None = None) -> SpectralBasis:
    """Full symmetric eigendecomposition of the anchor Gram matrix.

    Eigenvalues are sorted descending; those below the rank tolerance
    (default 1e-10 * largest) are clamped to 0 and excluded from the
    usable rank.  Eigenvector signs follow a deterministic convention so
    features are reproducible across runs.
    """
    if grid.n_anchors == 0:
        raise ValidationError("empty grid")
    K = gram_matrix(grid.anchors, cfg)
    try:
        eigvals, eigvecs = np.linalg.eigh(K)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("eigendecomposition failed") from exc
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = _fix_signs(eigvecs[:, order])
    if rank_tol is None:
        rank_tol = RANK_TOL_REL * eigvals[0]
    keep = eigvals > rank_tol
    eigvals = np.where(keep, eigvals, 0.0)
    return SpectralBasis(
        eigenvalues=eigvals,
        eigenvectors=eigvecs,
        grid=grid,
        kernel=cfg,
        rank=int(keep.sum()),
    )


def _check_same_grid(ge_grid: Grid, basis: SpectralBasis) -> None:
    if ge_grid is not basis.grid and not np.array_equal(
        ge_grid.anchors, basis.grid.anchors
    ):
        raise ValidationError("grid element and basis use different grids")


def project(ge: GridElement, basis: SpectralBasis, r: int,
            label: str | None = None, id: str | None = None) -> FeatureVector:
    """First r spectral coefficients mu_q = sqrt(l_q) * (v_q . beta)."""
    if not 1 <= r <= basis.rank:
        raise ValidationError(f"truncation order {r} outside [1, rank={basis.rank}]")
    _check_same_grid(ge.grid, basis)
    if ge.kernel != basis.kernel:
        raise ValidationError("kernel mismatch between element and basis")
    mu = np.sqrt(basis.eigenvalues[:r]) * (basis.eigenvectors[:, :r].T @ ge.beta)
    return FeatureVector(mu=mu, basis=basis, label=label, id=id)


def feature_inner(f: FeatureVector, g: FeatureVector) -> float:
    """Dot product of feature vectors; at full rank it equals the exact
    inner product of the underlying grid elements."""
    if f.basis is not g.basis:
        raise ValidationError("feature vectors from different bases")
    if f.r != g.r:
        raise ValidationError(f"truncation orders differ: {f.r} vs {g.r}")
    return float(f.mu @ g.mu)


def reconstruct(f: FeatureVector, basis: SpectralBasis | None = None) -> GridElement:
    """Grid element with beta = sum_q (mu_q / sqrt(l_q)) v_q.

    At r = rank this is the projection of the original beta onto the
    numerical range of K|_a; the reconstruction error in the induced
    norm is nonincreasing in r.
    """
    basis = basis or f.basis
    if basis is not f.basis:
        raise ValidationError("feature vector was built on a different basis")
    ell = basis.eigenvalues[: f.r]
    live = ell > 0
    coeffs = np.zeros(f.r)
    coeffs[live] = f.mu[live] / np.sqrt(ell[live])
    beta = basis.eigenvectors[:, : f.r] @ coeffs
    return GridElement(beta=beta, grid=basis.grid, kernel=basis.kernel)


# ---------------------------------------------------------------------------
# Basis cache and feature CSV
# ---------------------------------------------------------------------------

def basis_cache_key(window: Window, h: float, cfg: KernelConfig,
                    rank_tol: float | None = None) -> str:
    """Stable hash of everything the eigendecomposition depends on."""
    payload = json.dumps(
        {
            "window": [window.xmin, window.xmax, window.ymin, window.ymax],
            "h": h,
            "sigma": cfg.sigma,
            "form": cfg.form,
            "rank_tol": rank_tol,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def save_basis(basis: SpectralBasis, cache_dir: str | os.PathLike,
               rank_tol: float | None = None) -> str:
    """Store a basis in the cache directory; returns the file path."""
    os.makedirs(cache_dir, exist_ok=True)
    w = basis.grid.window
    key = basis_cache_key(w, basis.grid.h, basis.kernel, rank_tol)
    path = os.path.join(str(cache_dir), f"basis-{key}.npz")
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        np.savez_compressed(
            fh,
            eigenvalues=basis.eigenvalues,
            eigenvectors=basis.eigenvectors,
            rank=basis.rank,
            window=np.array([w.xmin, w.xmax, w.ymin, w.ymax]),
            h=basis.grid.h,
            sigma=basis.kernel.sigma,
            form=basis.kernel.form,
        )
    os.replace(tmp, path)
    return path


def load_basis(path: str | os.PathLike, window: Window, h: float,
               cfg: KernelConfig) -> SpectralBasis:
    """Load a cached basis, verifying it matches the requested config."""
    with np.load(path, allow_pickle=False) as data:
        stored_window = data["window"]
        stored = {
            "h": float(data["h"]),
            "sigma": float(data["sigma"]),
            "form": str(data["form"]),
        }
        expect_window = np.array([window.xmin, window.xmax, window.ymin, window.ymax])
        if (
            not np.array_equal(stored_window, expect_window)
            or stored["h"] != h
            or stored["sigma"] != cfg.sigma
            or stored["form"] != cfg.form
        ):
            raise DataFormatError(f"{path}: cached basis does not match requested config")
        grid = make_grid(window, h)
        return SpectralBasis(
            eigenvalues=data["eigenvalues"],
            eigenvectors=data["eigenvectors"],
            grid=grid,
            kernel=cfg,
            rank=int(data["rank"]),
        )


def features_to_csv(features: list[FeatureVector], path: str | os.PathLike) -> None:
    """Write features as CSV with header ``pattern_id,label,mu1,...,mur``."""
    if not features:
        raise ValidationError("no features to write")
    r = features[0].r
    if any(f.r != r for f in features):
        raise ValidationError("inconsistent truncation orders")
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pattern_id", "label"] + [f"mu{q + 1}" for q in range(r)])
        for i, f in enumerate(features):
            pid = f.id if f.id is not None else f"p{i:03d}"
            label = f.label if f.label is not None else ""
            writer.writerow([pid, label] + [repr(float(v)) for v in f.mu])
    os.replace(tmp, path)


def features_from_csv(path: str | os.PathLike) -> tuple[list[str], list[str | None], np.ndarray]:
    """Read a feature CSV; returns (ids, labels, n x r matrix)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["pattern_id", "label"]:
        raise DataFormatError(f"{path}: missing feature header")
    r = len(rows[0]) - 2
    if r < 1:
        raise DataFormatError(f"{path}: no feature columns")
    ids, labels, mus = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != r + 2:
            raise DataFormatError(f"{path}:{lineno}: expected {r + 2} fields")
        ids.append(row[0])
        labels.append(row[1] if row[1] else None)
        try:
            mus.append([float(v) for v in row[2:]])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: bad feature value: {exc}") from exc
    return ids, labels, np.asarray(mus, dtype=float).reshape(-1, r)
