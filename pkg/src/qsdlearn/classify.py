"""Helstrom (binary) and Pretty Good Measurement (multiclass) centroid classifiers."""
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .discrimination import Ensemble, Measurement, helstrom, pgm_details, success_probability
from .encoding import Dataset, class_centroids, encode_copies
from .exceptions import DataError, DegenerateClassError, ShapeError
from .hermitian import DEFAULT_MAX_DIM

KINDS = ("helstrom", "pgm")
MODEL_FORMAT = "qsd-model/1"
# scores this close to the maximum count as tied; ties go to the smallest class index
TIE_ATOL = 1e-12


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    copies: int
    feature_dim: int
    priors: Tuple[float, ...]
    centroids: Tuple[np.ndarray, ...]
    measurement: Measurement
    bound: float
    full_rank_sigma: Optional[bool] = None
    class_names: Optional[Tuple[str, ...]] = None

    @property
    def num_classes(self) -> int:
        return len(self.priors)

    @property
    def dim(self) -> int:
        return self.measurement.dim


@dataclass(frozen=True)
class Prediction:
    """Predicted 1-based label with its score vector.

    ``scores`` drive the argmax: ``tr(P+ rho), tr(P- rho)`` for Helstrom models
    and ``p_i tr(F_i rho)`` for PGM models. ``probabilities`` are the prior-free
    outcome probabilities ``tr(M_i rho)`` and always sum to one.
    """

    label: int
    scores: np.ndarray
    probabilities: np.ndarray


@dataclass(frozen=True)
class MetricsReport:
    confusion: np.ndarray
    balanced_accuracy: float
    f1_macro: float
    cohen_kappa: float
    accuracy: float = field(default=float("nan"))

    def as_dict(self) -> dict:
        return {
            "confusion": self.confusion.tolist(),
            "accuracy": self.accuracy,
            "balanced_accuracy": self.balanced_accuracy,
            "f1_macro": self.f1_macro,
            "cohen_kappa": self.cohen_kappa,
        }


def train(ds: Dataset, kind: str = "helstrom", n: int = 1,
          max_dim: int = DEFAULT_MAX_DIM) -> TrainedModel:
    """Fit class centroids on ``n``-copy encodings and build the measurement."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == "helstrom" and ds.num_classes != 2:
        raise DegenerateClassError(
            f"the Helstrom classifier is binary; dataset has {ds.num_classes} classes")
    pairs = class_centroids(ds, n, max_dim)
    priors = tuple(float(p) for p, _ in pairs)
    centroids = tuple(c for _, c in pairs)
    if kind == "helstrom":
        res = helstrom(centroids[0], centroids[1], priors[0], priors[1])
        measurement, bound, full_rank = res.measurement, res.bound, None
    else:
        R = Ensemble(priors, centroids)
        res = pgm_details(R)
        measurement = res.measurement
        bound = success_probability(R, measurement)
        full_rank = res.full_rank_sigma
    return TrainedModel(kind, n, ds.num_features, priors, centroids, measurement,
                        float(bound), full_rank, ds.class_names)


def _argmax_min_index(scores: np.ndarray) -> int:
    top = scores.max()
    return int(np.flatnonzero(scores >= top - TIE_ATOL)[0]) + 1


def predict(model: TrainedModel, x) -> Prediction:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.feature_dim:
        raise ShapeError(f"expected {model.feature_dim} features, got shape {x.shape}")
    rho = encode_copies(x, model.copies, max_dim=max(model.dim, 1))
    probs = model.measurement.probabilities(rho)
    if model.kind == "pgm":
        scores = np.asarray(model.priors) * probs
    else:
        scores = probs
    return Prediction(_argmax_min_index(scores), scores, probs)


def predict_many(model: TrainedModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.array([predict(model, x).label for x in X], dtype=int)


def confusion_matrix(y_true, y_pred, num_classes: int) -> np.ndarray:
    """Rows are true classes, columns predictions; labels are 1-based."""
    C = np.zeros((num_classes, num_classes), dtype=int)
    np.add.at(C, (np.asarray(y_true) - 1, np.asarray(y_pred) - 1), 1)
    return C


def metrics_from_confusion(C) -> MetricsReport:
    """Balanced accuracy, macro F1 and Cohen's kappa from a confusion matrix.

    Balanced accuracy averages recall over classes that occur in the truth.
    Classes absent from both truth and predictions contribute an F1 of 0.
    Kappa is defined as 0 when chance agreement is 1.
    """
    C = np.asarray(C, dtype=int)
    total = C.sum()
    if total == 0:
        raise DataError("cannot compute metrics on an empty test set")
    tp = np.diag(C).astype(float)
    support = C.sum(axis=1).astype(float)
    predicted = C.sum(axis=0).astype(float)
    present = support > 0
    balanced = float(np.mean(tp[present] / support[present]))
    denom = support + predicted
    f1 = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    p_o = tp.sum() / total
    p_e = float(np.dot(support, predicted)) / total**2
    kappa = 0.0 if abs(1.0 - p_e) < 1e-15 else float((p_o - p_e) / (1.0 - p_e))
    return MetricsReport(C, balanced, float(f1.mean()), kappa, float(p_o))


def evaluate(model: TrainedModel, test: Dataset) -> MetricsReport:
    if test.num_points == 0:
        raise DataError("empty test set")
    if test.num_classes != model.num_classes:
        raise ShapeError(
            f"test set has {test.num_classes} classes, model has {model.num_classes}")
    y_pred = predict_many(model, test.X)
    return metrics_from_confusion(confusion_matrix(test.y, y_pred, model.num_classes))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("pearson needs two equal-length vectors with at least 2 entries")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    if sxx <= 0 or syy <= 0:
        raise ZeroDivisionError("correlation is undefined for zero-variance input")
    return float(np.clip(np.dot(dx, dy) / np.sqrt(sxx * syy), -1.0, 1.0))


def _encode_matrix(A) -> dict:
    A = np.asarray(A, dtype=complex)
    flat = A.reshape(-1)
    return {"dims": list(A.shape),
            "data": np.stack([flat.real, flat.imag], axis=1).tolist()}


def _decode_matrix(obj) -> np.ndarray:
    data = np.asarray(obj["data"], dtype=float)
    return (data[:, 0] + 1j * data[:, 1]).reshape(obj["dims"])


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "version": MODEL_FORMAT,
        "kind": model.kind,
        "copies": model.copies,
        "feature_dim": model.feature_dim,
        "priors": list(model.priors),
        "bound": model.bound,
        "full_rank_sigma": model.full_rank_sigma,
        "class_names": list(model.class_names) if model.class_names else None,
        "centroids": [_encode_matrix(c) for c in model.centroids],
        "effects": [_encode_matrix(E) for E in model.measurement.effects],
    }


def model_from_dict(obj: dict) -> TrainedModel:
    if obj.get("version") != MODEL_FORMAT:
        raise DataError(f"unsupported model format {obj.get('version')!r}")
    names = obj.get("class_names")
    return TrainedModel(
        kind=obj["kind"],
        copies=int(obj["copies"]),
        feature_dim=int(obj["feature_dim"]),
        priors=tuple(float(p) for p in obj["priors"]),
        centroids=tuple(_decode_matrix(c) for c in obj["centroids"]),
        measurement=Measurement([_decode_matrix(E) for E in obj["effects"]]),
        bound=float(obj["bound"]),
        full_rank_sigma=obj.get("full_rank_sigma"),
        class_names=tuple(names) if names else None,
    )


def dumps_model(model: TrainedModel) -> str:
    return json.dumps(model_to_dict(model), indent=1)


def loads_model(text: str) -> TrainedModel:
    return model_from_dict(json.loads(text))
