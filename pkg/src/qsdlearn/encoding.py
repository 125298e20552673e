"""Amplitude encoding of feature vectors, quantum centroids and n-copy centroids."""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import CapacityError, DegenerateClassError, EncodingError, ShapeError
from .hermitian import DEFAULT_MAX_DIM, as_square, kron_power


@dataclass(frozen=True)
class Dataset:
    """Labeled training or test data.

    ``y`` holds 1-based class indices ``1..num_classes``. ``class_names[i - 1]``
    is the original label of class ``i`` when the data came from a file.
    """

    X: np.ndarray
    y: np.ndarray
    num_classes: int
    class_names: Optional[Tuple[str, ...]] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ShapeError(f"X must have shape (m, d) with d >= 1, got {X.shape}")
        if y.shape != (X.shape[0],):
            raise ShapeError(f"y must have shape ({X.shape[0]},), got {y.shape}")
        if not np.all(np.isfinite(X)):
            row, col = np.argwhere(~np.isfinite(X))[0]
            raise EncodingError(f"non-finite feature at row {row}, column {col}")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise ShapeError("labels must be integer class indices")
            y = y.astype(int)
        if self.num_classes < 2:
            raise DegenerateClassError(f"need at least 2 classes, got {self.num_classes}")
        if y.size and (y.min() < 1 or y.max() > self.num_classes):
            raise ShapeError(f"labels must lie in 1..{self.num_classes}")
        counts = np.bincount(y, minlength=self.num_classes + 1)[1:]
        if np.any(counts == 0):
            missing = [int(i) + 1 for i in np.flatnonzero(counts == 0)]
            raise DegenerateClassError(f"classes without any points: {missing}")
        if self.class_names is not None and len(self.class_names) != self.num_classes:
            raise ShapeError("class_names must have one entry per class")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def num_points(self) -> int:
        return self.X.shape[0]

    @property
    def num_features(self) -> int:
        return self.X.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.num_classes + 1)[1:]

    def subset(self, idx) -> "Dataset":
        """Rows ``idx``; every class must still be represented."""
        return Dataset(self.X[idx], self.y[idx], self.num_classes, self.class_names,
                       dict(self.metadata))


def _as_feature_vector(x) -> np.ndarray:
    x = np.asarray(x)
    if np.iscomplexobj(x):
        raise EncodingError("complex features are not supported")
    x = np.atleast_1d(x.astype(float))
    if x.ndim != 1 or x.size < 1:
        raise EncodingError(f"feature vector must be 1-D and non-empty, got shape {x.shape}")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise EncodingError(f"non-finite feature at index {bad[0]}: {x[bad[0]]}")
    return x


def amplitude_vector(x) -> np.ndarray:
    """Unit vector ``[x_1, ..., x_d, 1] / sqrt(|x|^2 + 1)``."""
    x = _as_feature_vector(x)
    v = np.append(x, 1.0)
    return v / np.sqrt(np.dot(x, x) + 1.0)


def amplitude_encode(x) -> np.ndarray:
    """Pure density matrix of dimension ``d + 1`` encoding a real feature vector."""
    v = amplitude_vector(x).astype(complex)
    return np.outer(v, v.conj())


def check_capacity(d: int, n: int, max_dim: int = DEFAULT_MAX_DIM) -> int:
    if n < 1:
        raise ValueError(f"number of copies must be >= 1, got {n}")
    required = (d + 1) ** n
    if required > max_dim:
        raise CapacityError(required, max_dim)
    return required


def encode_copies(x, n: int, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """``n``-fold tensor power of the amplitude encoding of ``x``."""
    x = _as_feature_vector(x)
    check_capacity(x.size, n, max_dim)
    # the tensor power of a pure state is the projector onto the tensor power of its vector
    v = amplitude_vector(x).astype(complex)
    w = v
    for _ in range(n - 1):
        w = np.kron(w, v)
    return np.outer(w, w.conj())


def quantum_centroid(states: Sequence) -> np.ndarray:
    """Uniform average of density matrices, summed in list order."""
    if len(states) == 0:
        raise DegenerateClassError("cannot form the centroid of an empty class")
    first = as_square(states[0], "state 0")
    acc = np.zeros_like(first)
    for j, rho in enumerate(states):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != first.shape:
            raise ShapeError(f"state {j} has shape {rho.shape}, expected {first.shape}")
        acc = acc + rho
    return acc / len(states)


def copies_centroid(states: Sequence, n: int, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Average of the ``n``-fold tensor powers of arbitrary density matrices.

    This is generally *not* the tensor power of :func:`quantum_centroid`.
    """
    if len(states) == 0:
        raise DegenerateClassError("cannot form the centroid of an empty class")
    return quantum_centroid([kron_power(rho, n, max_dim) for rho in states])


def encoded_centroid(X, n: int = 1, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """n-copy centroid of the amplitude encodings of the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DegenerateClassError("cannot form the centroid of an empty class")
    check_capacity(X.shape[1], n, max_dim)
    # rank-k update: (1/k) sum_j w_j w_j^dagger == W W^dagger / k, W columns in point order
    W = []
    for x in X:
        v = amplitude_vector(x).astype(complex)
        w = v
        for _ in range(n - 1):
            w = np.kron(w, v)
        W.append(w)
    W = np.array(W).T
    return (W @ W.conj().T) / X.shape[0]


def class_centroids(ds: Dataset, n: int = 1,
                    max_dim: int = DEFAULT_MAX_DIM) -> List[Tuple[float, np.ndarray]]:
    """Per-class ``(prior, n-copy centroid)`` pairs ordered by class index.

    Priors are class frequencies ``|S^i| / m``.
    """
    check_capacity(ds.num_features, n, max_dim)
    counts = ds.class_counts()
    m = counts.sum()
    out = []
    for i in range(1, ds.num_classes + 1):
        rows = ds.X[ds.y == i]
        out.append((counts[i - 1] / m, encoded_centroid(rows, n, max_dim)))
    return out


def encode_dataset(ds: Dataset, n: int = 1, max_dim: int = DEFAULT_MAX_DIM):
    """List of ``(state, label)`` pairs for every point, each an n-copy encoding."""
    check_capacity(ds.num_features, n, max_dim)
    return [(encode_copies(x, n, max_dim), int(label)) for x, label in zip(ds.X, ds.y)]
