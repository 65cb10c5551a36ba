"""Multivariate tests on feature vectors.

Box's M for homogeneity of group covariance matrices (chi-square
approximation), one-way MANOVA with the Pillai-trace approximate F
(headline statistic: its df pattern matches the reference results),
Wilks' lambda with Rao's F as a secondary statistic, and per-coordinate
one-way ANOVA.  Upper-tail probabilities come from scipy.stats, whose
chi-square and F survival functions are accurate well below the 1e-8
absolute level required here.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import SingularSystemError, ValidationError

__all__ = [
    "GroupedFeatures",
    "TestResult",
    "boxm_test",
    "manova_pillai",
    "manova_wilks",
    "anova_univariate",
    "results_to_csv",
    "results_to_json",
]


class GroupedFeatures:
    """An n x p feature matrix with a group label per row."""

    def __init__(self, features: np.ndarray, labels: list[str]):
        x = np.asarray(features, dtype=float)
        if x.ndim != 2 or x.shape[1] < 1:
            raise ValidationError("features must be a 2-D matrix with >= 1 column")
        if len(labels) != x.shape[0]:
            raise ValidationError("one label per feature row required")
        if any(lb is None for lb in labels):
            raise ValidationError("all rows must be labeled")
        self.features = x
        self.labels = list(labels)
        self.groups = sorted(set(self.labels))
        if len(self.groups) < 2:
            raise ValidationError("at least 2 distinct groups required")
        self.group_indices = {
            g: np.flatnonzero([lb == g for lb in self.labels]) for g in self.groups
        }
        if any(idx.size < 2 for idx in self.group_indices.values()):
            raise ValidationError("every group needs at least 2 observations")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def g(self) -> int:
        return len(self.groups)

    def group_sizes(self) -> dict[str, int]:
        return {g: int(idx.size) for g, idx in self.group_indices.items()}

    def group_data(self, g: str) -> np.ndarray:
        return self.features[self.group_indices[g]]


@dataclass(frozen=True)
class TestResult:
    """Statistic, degrees of freedom, and p-value of one test."""

    method: str
    statistic: float
    df1: float
    df2: float | None
    p_value: float

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValidationError(f"p-value {self.p_value} outside [0, 1]")


def _logdet_psd(mat: np.ndarray, what: str) -> float:
    sign, logdet = np.linalg.slogdet(mat)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularSystemError(f"singular or indefinite {what}")
    return logdet


def _group_covs(data: GroupedFeatures) -> tuple[dict[str, np.ndarray], np.ndarray]:
    covs = {}
    pooled = np.zeros((data.p, data.p))
    for g in data.groups:
        x = data.group_data(g)
        if x.shape[0] < data.p + 1:
            raise ValidationError(
                f"group {g!r} has {x.shape[0]} cases; needs >= p+1 = {data.p + 1} "
                "for covariance-based tests"
            )
        covs[g] = np.cov(x, rowvar=False, ddof=1).reshape(data.p, data.p)
        pooled += (x.shape[0] - 1) * covs[g]
    pooled /= data.n - data.g
    return covs, pooled


def boxm_test(data: GroupedFeatures) -> TestResult:
    """Box's M test of equal group covariance matrices.

    M = (n-g) ln|S_pooled| - sum_k (n_k-1) ln|S_k|; the reported
    statistic is Box's chi-square approximation (1-c)M with
    df = (g-1) p (p+1) / 2.
    """
    covs, pooled = _group_covs(data)
    sizes = data.group_sizes()
    n, g, p = data.n, data.g, data.p
    m_stat = (n - g) * _logdet_psd(pooled, "pooled covariance")
    for grp in data.groups:
        try:
            m_stat -= (sizes[grp] - 1) * _logdet_psd(covs[grp], "group covariance")
        except SingularSystemError as exc:
            raise SingularSystemError(f"group {grp!r}: {exc}") from exc
    c = (sum(1.0 / (sizes[grp] - 1) for grp in data.groups) - 1.0 / (n - g)) * (
        2 * p**2 + 3 * p - 1
    ) / (6.0 * (p + 1) * (g - 1))
    chi2 = max(m_stat * (1.0 - c), 0.0)
    df = (g - 1) * p * (p + 1) / 2.0
    p_value = float(stats.chi2.sf(chi2, df))
    return TestResult("boxm", chi2, df, None, p_value)


def _scatter_matrices(data: GroupedFeatures) -> tuple[np.ndarray, np.ndarray]:
    grand = data.features.mean(axis=0)
    b = np.zeros((data.p, data.p))
    w = np.zeros((data.p, data.p))
    for g in data.groups:
        x = data.group_data(g)
        d = x.mean(axis=0) - grand
        b += x.shape[0] * np.outer(d, d)
        centered = x - x.mean(axis=0)
        w += centered.T @ centered
    return b, w


def manova_pillai(data: GroupedFeatures) -> TestResult:
    """One-way MANOVA via the Pillai trace V = tr(B (B+W)^-1).

    Approximate F uses s = min(p, g-1), m = (|p-g+1|-1)/2 and
    n' = (n-g-p-1)/2, with df1 = s(2m+s+1) and df2 = s(2n'+s+1).
    """
    n, g, p = data.n, data.g, data.p
    if n <= g + p:
        raise ValidationError(f"need n > g + p (got n={n}, g={g}, p={p})")
    b, w = _scatter_matrices(data)
    total = b + w
    try:
        v = float(np.trace(np.linalg.solve(total, b)))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("singular total scatter matrix B+W") from exc
    s = min(p, g - 1)
    m = (abs(p - g + 1) - 1) / 2.0
    n_prime = (n - g - p - 1) / 2.0
    df1 = s * (2 * m + s + 1)
    df2 = s * (2 * n_prime + s + 1)
    v = min(max(v, 0.0), s)
    if v >= s:  # complete separation: F is unbounded
        f_stat = np.inf
    else:
        f_stat = (df2 / df1) * v / (s - v)
    p_value = float(stats.f.sf(f_stat, df1, df2))
    return TestResult("manova-pillai", f_stat, df1, df2, p_value)


def manova_wilks(data: GroupedFeatures) -> TestResult:
    """One-way MANOVA via Wilks' lambda = |W| / |B+W| with Rao's F."""
    n, g, p = data.n, data.g, data.p
    if n <= g + p:
        raise ValidationError(f"need n > g + p (got n={n}, g={g}, p={p})")
    b, w = _scatter_matrices(data)
    lam = np.exp(_logdet_psd(w, "within scatter") - _logdet_psd(b + w, "total scatter"))
    lam = min(lam, 1.0)
    q = g - 1
    pq = p * q
    denom = p**2 + q**2 - 5
    t = np.sqrt((p**2 * q**2 - 4) / denom) if denom > 0 else 1.0
    wb = n - 1 - (p + q + 1) / 2.0  # Bartlett correction
    df1 = pq
    df2 = wb * t - (pq - 2) / 2.0
    lam_t = lam ** (1.0 / t)
    f_stat = np.inf if lam_t == 0 else (1.0 - lam_t) / lam_t * df2 / df1
    p_value = float(stats.f.sf(f_stat, df1, df2))
    return TestResult("manova-wilks", float(lam), df1, df2, p_value)


def anova_univariate(data: GroupedFeatures, coeff_index: int) -> TestResult:
    """One-way ANOVA F on feature column ``coeff_index`` (0-based)."""
    if not 0 <= coeff_index < data.p:
        raise ValidationError(f"coefficient index {coeff_index} outside [0, {data.p})")
    n, g = data.n, data.g
    if n - g < 1:
        raise ValidationError("residual degrees of freedom must be >= 1")
    x = data.features[:, coeff_index]
    grand = x.mean()
    ssb = ssw = 0.0
    for grp in data.groups:
        xg = x[data.group_indices[grp]]
        ssb += xg.size * (xg.mean() - grand) ** 2
        ssw += ((xg - xg.mean()) ** 2).sum()
    method = f"anova-mu{coeff_index + 1}"
    if ssw == 0.0:
        if ssb == 0.0:
            return TestResult(method, 0.0, g - 1, n - g, 1.0)
        raise SingularSystemError("zero within-group variance")
    f_stat = (ssb / (g - 1)) / (ssw / (n - g))
    p_value = float(stats.f.sf(f_stat, g - 1, n - g))
    return TestResult(method, f_stat, g - 1, n - g, p_value)


def results_to_csv(results: list[TestResult], path: str | os.PathLike) -> None:
    """Write test results as CSV ``method,statistic,df1,df2,p_value``."""
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "statistic", "df1", "df2", "p_value"])
        for r in results:
            writer.writerow(
                [
                    r.method,
                    repr(float(r.statistic)),
                    repr(float(r.df1)),
                    "" if r.df2 is None else repr(float(r.df2)),
                    repr(float(r.p_value)),
                ]
            )
    os.replace(tmp, path)


def results_to_json(results: list[TestResult]) -> str:
    return json.dumps(
        [
            {
                "method": r.method,
                "statistic": r.statistic,
                "df1": r.df1,
                "df2": r.df2,
                "p_value": r.p_value,
            }
            for r in results
        ],
        indent=2,
    )
