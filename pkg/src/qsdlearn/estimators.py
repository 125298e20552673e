"""scikit-learn compatible wrappers around :mod:`qsdlearn.classify`."""
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

from . import classify
from .encoding import Dataset
from .hermitian import DEFAULT_MAX_DIM


class QuantumCentroidClassifier(ClassifierMixin, BaseEstimator):
    """Quantum centroid classifier on amplitude-encoded, n-copy tensored features.

    Parameters
    ----------
    kind : {"helstrom", "pgm"}
        Measurement used for prediction. ``"helstrom"`` requires two classes.
    copies : int
        Number of tensor copies of each encoded point.
    max_dim : int
        Cap on the encoded dimension ``(n_features + 1) ** copies``.

    Attributes
    ----------
    classes_ : ndarray
        Sorted original labels; ``classes_[i]`` is internal class ``i + 1``.
    model_ : TrainedModel
    bound_ : float
        Helstrom or PGM bound of the trained centroid ensemble.
    """

    def __init__(self, kind="helstrom", copies=1, max_dim=DEFAULT_MAX_DIM):
        self.kind = kind
        self.copies = copies
        self.max_dim = max_dim

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64)
        check_classification_targets(y)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        ds = Dataset(X, y_idx + 1, len(self.classes_),
                     tuple(str(c) for c in self.classes_))
        self.model_ = classify.train(ds, self.kind, self.copies, self.max_dim)
        self.bound_ = self.model_.bound
        return self

    def _predictions(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return [classify.predict(self.model_, x) for x in X]

    def decision_function(self, X):
        """Per-class scores used by the argmax (prior-weighted for PGM)."""
        return np.array([p.scores for p in self._predictions(X)])

    def predict_proba(self, X):
        """Outcome probabilities of the measurement; rows sum to one."""
        return np.array([p.probabilities for p in self._predictions(X)])

    def predict(self, X):
        labels = np.array([p.label for p in self._predictions(X)], dtype=int)
        return self.classes_[labels - 1]


class HelstromClassifier(QuantumCentroidClassifier):
    """Binary classifier using the Helstrom measurement of the two class centroids."""

    kind = "helstrom"

    def __init__(self, copies=1, max_dim=DEFAULT_MAX_DIM):
        self.copies = copies
        self.max_dim = max_dim


class PGMClassifier(QuantumCentroidClassifier):
    """Multiclass classifier using the Pretty Good Measurement of the class centroids."""

    kind = "pgm"

    def __init__(self, copies=1, max_dim=DEFAULT_MAX_DIM):
        self.copies = copies
        self.max_dim = max_dim
