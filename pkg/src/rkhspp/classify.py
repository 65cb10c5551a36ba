"""Gaussian discriminant classifiers and leave-one-out cross-validation.

LDA uses one pooled covariance across classes, QDA one covariance per
class.  Posteriors come from class-conditional Gaussian log-densities
plus log priors, normalized with log-sum-exp.  Singular covariances are
an error by default; an optional ridge is available for exploratory
use but never applied silently.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import logsumexp

from .errors import DataFormatError, SingularSystemError, ValidationError
from .mvstats import GroupedFeatures

__all__ = [
    "DiscriminantModel",
    "Prediction",
    "fit",
    "predict",
    "predict_many",
    "training_error",
    "loocv",
    "save_model",
    "load_model",
]

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class DiscriminantModel:
    """Fitted LDA ("linear") or QDA ("quadratic") model.

    ``covariances`` has shape (p, p) for linear models and (g, p, p)
    for quadratic ones.  Classes are kept sorted so argmax ties break
    lexicographically by tag.
    """

    kind: str
    classes: list[str]
    means: np.ndarray  # (g, p)
    covariances: np.ndarray
    priors: np.ndarray  # (g,), positive, sums to 1

    @property
    def p(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class Prediction:
    """Predicted label and per-class posterior probabilities."""

    label: str
    posteriors: dict[str, float]


#: Covariances whose Cholesky pivots span more than this condition range
#: are treated as singular rather than silently inverted.
_RCOND_MIN = 1e-12


def _factor(cov: np.ndarray, what: str):
    try:
        cho = cho_factor(cov)
    except LinAlgError as exc:
        raise SingularSystemError(f"singular covariance ({what})") from exc
    d = np.diag(cho[0])
    if d.min() ** 2 < _RCOND_MIN * d.max() ** 2:
        raise SingularSystemError(f"numerically singular covariance ({what})")
    return cho


def fit(
    data: GroupedFeatures,
    kind: str = "linear",
    priors: dict[str, float] | None = None,
    ridge: float = 0.0,
) -> DiscriminantModel:
    """Estimate class means, covariance(s) and priors from grouped data.

    Default priors are the sample class proportions.  ``ridge`` > 0
    adds ridge * I to each covariance (off by default).
    """
    if kind not in ("linear", "quadratic"):
        raise ValidationError(f"unknown discriminant kind {kind!r}")
    n, p, g = data.n, data.p, data.g
    if kind == "linear" and n < g + p:
        raise ValidationError(f"linear fit needs n >= g + p (got n={n}, g={g}, p={p})")
    means = np.vstack([data.group_data(grp).mean(axis=0) for grp in data.groups])
    if kind == "linear":
        pooled = np.zeros((p, p))
        for grp in data.groups:
            x = data.group_data(grp)
            centered = x - x.mean(axis=0)
            pooled += centered.T @ centered
        covariances = pooled / (n - g) + ridge * np.eye(p)
    else:
        covs = []
        for grp in data.groups:
            x = data.group_data(grp)
            if x.shape[0] < p + 1:
                raise ValidationError(
                    f"group {grp!r} has {x.shape[0]} cases; quadratic fit needs >= {p + 1}"
                )
            covs.append(np.cov(x, rowvar=False, ddof=1).reshape(p, p) + ridge * np.eye(p))
        covariances = np.stack(covs)
    # surface singular covariances at fit time, not first prediction
    if kind == "linear":
        _factor(covariances, "pooled")
    else:
        for k, grp in enumerate(data.groups):
            _factor(covariances[k], f"class {grp!r}")
    if priors is None:
        sizes = data.group_sizes()
        pri = np.array([sizes[grp] / n for grp in data.groups])
    else:
        if set(priors) != set(data.groups):
            raise ValidationError("priors must cover exactly the observed classes")
        pri = np.array([float(priors[grp]) for grp in data.groups])
        if (pri <= 0).any() or not np.isclose(pri.sum(), 1.0):
            raise ValidationError("priors must be positive and sum to 1")
        pri = pri / pri.sum()
    return DiscriminantModel(
        kind=kind,
        classes=list(data.groups),
        means=means,
        covariances=covariances,
        priors=pri,
    )


def _log_densities(model: DiscriminantModel, x: np.ndarray) -> np.ndarray:
    """Gaussian log-density of each class at the rows of x, plus log prior."""
    g, p = len(model.classes), model.p
    out = np.empty((x.shape[0], g))
    const = -0.5 * p * np.log(2.0 * np.pi)
    if model.kind == "linear":
        factors = [(_factor(model.covariances, "pooled"), model.covariances)] * g
    else:
        factors = [
            (_factor(model.covariances[k], f"class {model.classes[k]!r}"),
             model.covariances[k])
            for k in range(g)
        ]
    for k in range(g):
        cho, cov = factors[k]
        logdet = 2.0 * np.log(np.diag(cho[0])).sum()
        diff = x - model.means[k]
        maha = np.einsum("ij,ij->i", diff, cho_solve(cho, diff.T).T)
        out[:, k] = const - 0.5 * (logdet + maha) + np.log(model.priors[k])
    return out


def predict_many(model: DiscriminantModel, x: np.ndarray) -> list[Prediction]:
    """Predictions for each row of an (n, p) feature matrix."""
    x = np.asarray(x, dtype=float).reshape(-1, model.p)
    logp = _log_densities(model, x)
    logpost = logp - logsumexp(logp, axis=1, keepdims=True)
    post = np.exp(logpost)
    post /= post.sum(axis=1, keepdims=True)
    preds = []
    for i in range(x.shape[0]):
        k = int(np.argmax(post[i]))  # classes sorted, ties go to first
        preds.append(
            Prediction(
                label=model.classes[k],
                posteriors={c: float(post[i, j]) for j, c in enumerate(model.classes)},
            )
        )
    return preds


def predict(model: DiscriminantModel, x: np.ndarray) -> Prediction:
    """Prediction for a single feature vector."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.p:
        raise ValidationError(f"feature dimension {x.shape[0]} != model dimension {model.p}")
    return predict_many(model, x.reshape(1, -1))[0]


def training_error(data: GroupedFeatures, model: DiscriminantModel) -> float:
    """Resubstitution misclassification rate of a fitted model."""
    preds = predict_many(model, data.features)
    wrong = sum(pred.label != true for pred, true in zip(preds, data.labels))
    return wrong / data.n


def loocv(
    data: GroupedFeatures,
    kind: str = "linear",
    priors: dict[str, float] | None = None,
    ridge: float = 0.0,
) -> tuple[float, list[Prediction]]:
    """Leave-one-out cross-validation error and per-case predictions.

    Each case is predicted by a model fitted on the remaining n-1
    cases; any fold whose fit fails aborts with the offending case
    index in the error message.
    """
    preds: list[Prediction] = []
    wrong = 0
    for i in range(data.n):
        keep = [j for j in range(data.n) if j != i]
        sub = GroupedFeatures(data.features[keep], [data.labels[j] for j in keep])
        try:
            model = fit(sub, kind=kind, priors=priors, ridge=ridge)
            pred = predict(model, data.features[i])
        except (ValidationError, SingularSystemError) as exc:
            raise type(exc)(f"leave-one-out fold {i}: {exc}") from exc
        preds.append(pred)
        wrong += pred.label != data.labels[i]
    return wrong / data.n, preds


def save_model(model: DiscriminantModel, path: str | os.PathLike) -> None:
    """Serialize a model as a versioned JSON record."""
    record = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "classes": model.classes,
        "means": model.means.tolist(),
        "covariances": model.covariances.tolist(),
        "priors": model.priors.tolist(),
    }
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2)
    os.replace(tmp, path)


def load_model(path: str | os.PathLike) -> DiscriminantModel:
    with open(path, encoding="utf-8") as fh:
        record = json.load(fh)
    if record.get("format_version") != MODEL_FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported model format version")
    return DiscriminantModel(
        kind=record["kind"],
        classes=list(record["classes"]),
        means=np.asarray(record["means"], dtype=float),
        covariances=np.asarray(record["covariances"], dtype=float),
        priors=np.asarray(record["priors"], dtype=float),
    )
