"""Seeded random generators for states, ensembles and small datasets.

Pure states are normalized standard complex Gaussian vectors; mixed states
are uniform mixtures of ``rank`` such pure states.
"""
import numpy as np

from .discrimination import Ensemble
from .encoding import Dataset


def as_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_pure_vector(dim: int, rng=None) -> np.ndarray:
    rng = as_rng(rng)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density_matrix(dim: int, rank: int = None, rng=None) -> np.ndarray:
    """Uniform mixture of ``rank`` random pure states (``rank`` defaults to ``dim``)."""
    rng = as_rng(rng)
    rank = dim if rank is None else rank
    rho = np.zeros((dim, dim), dtype=complex)
    for _ in range(rank):
        v = random_pure_vector(dim, rng)
        rho += np.outer(v, v.conj())
    return rho / rank


def random_unitary(dim: int, rng=None) -> np.ndarray:
    rng = as_rng(rng)
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_hermitian(dim: int, rank: int = None, rng=None, psd: bool = False,
                     low: float = 0.1, high: float = 2.0) -> np.ndarray:
    """``V diag(lam) V^dagger`` with ``dim - rank`` eigenvalues set exactly to zero.

    Nonzero eigenvalue magnitudes are uniform in ``[low, high]``; signs are
    random unless ``psd``.
    """
    rng = as_rng(rng)
    rank = dim if rank is None else rank
    lam = np.zeros(dim)
    lam[:rank] = rng.uniform(low, high, size=rank)
    if not psd:
        lam[:rank] *= rng.choice([-1.0, 1.0], size=rank)
    rng.shuffle(lam)
    V = random_unitary(dim, rng)
    A = (V * lam) @ V.conj().T
    return (A + A.conj().T) / 2


def random_ensemble(dim: int, size: int = 2, rng=None, uniform_priors: bool = True,
                    max_rank: int = None) -> Ensemble:
    """Ensemble of ``size`` random states with ranks drawn from ``1..max_rank``."""
    rng = as_rng(rng)
    max_rank = dim if max_rank is None else max_rank
    states = [random_density_matrix(dim, int(rng.integers(1, max_rank + 1)), rng)
              for _ in range(size)]
    if uniform_priors:
        priors = np.full(size, 1.0 / size)
    else:
        priors = rng.dirichlet(np.ones(size))
        priors = np.clip(priors, 1e-3, None)
        priors /= priors.sum()
    return Ensemble(priors, states)


def orthogonal_pair(dim: int, rng=None):
    """Two density matrices with mutually orthogonal supports."""
    rng = as_rng(rng)
    U = random_unitary(dim, rng)
    k = int(rng.integers(1, dim))
    w1 = rng.uniform(0.1, 1.0, size=k)
    w2 = rng.uniform(0.1, 1.0, size=dim - k)
    A, B = U[:, :k], U[:, k:]
    rho1 = (A * (w1 / w1.sum())) @ A.conj().T
    rho2 = (B * (w2 / w2.sum())) @ B.conj().T
    return rho1, rho2


def random_dataset(rng=None, num_classes: int = 2, num_features: int = None,
                   max_features: int = 3, min_points: int = 2, max_points: int = 20,
                   low: float = -1.0, high: float = 1.0) -> Dataset:
    """Small random dataset with features uniform in ``[low, high)``.

    Each class gets at least one point; total size is drawn from
    ``max(min_points, num_classes)..max_points``.
    """
    rng = as_rng(rng)
    d = int(rng.integers(1, max_features + 1)) if num_features is None else num_features
    m = int(rng.integers(max(min_points, num_classes), max_points + 1))
    y = np.concatenate([np.arange(1, num_classes + 1),
                        rng.integers(1, num_classes + 1, size=m - num_classes)])
    rng.shuffle(y)
    X = rng.uniform(low, high, size=(m, d))
    return Dataset(X, y, num_classes)
