"""Dense complex Hermitian matrix toolkit.

Every spectral routine here goes through :func:`eig_hermitian`; there is no
SVD path. Matrices are plain ``numpy`` arrays of complex dtype and all
functions are pure.
"""
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import CapacityError, NotHermitianError, NotPSDError, ShapeError

HERMITIAN_ATOL = 1e-12
PSD_CLAMP_TOL = 1e-10
TRACE_ATOL = 1e-10
DEFAULT_MAX_DIM = 4096


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def as_square(A, name: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ShapeError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    return A


def check_hermitian(A, atol: float = HERMITIAN_ATOL, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a complex square array, raising if it is not Hermitian."""
    A = as_square(A, name)
    asym = np.max(np.abs(A - A.conj().T))
    if asym > atol:
        raise NotHermitianError(
            f"{name} is not Hermitian: max |A[j,k] - conj(A[k,j])| = {asym:.3e} > {atol:g}"
        )
    return A


def check_density_matrix(rho, atol: float = TRACE_ATOL, name: str = "state") -> np.ndarray:
    """Validate Hermiticity, positivity and unit trace of a density matrix."""
    rho = check_hermitian(rho, name=name)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise NotPSDError(f"{name} has trace {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -PSD_CLAMP_TOL:
        raise NotPSDError(f"{name} has negative eigenvalue {lam_min:.3e}")
    return rho


def eig_hermitian(A) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises :class:`NotHermitianError` naming the largest asymmetry when ``A`` is
    not Hermitian within ``1e-12``.
    """
    A = check_hermitian(A)
    w, V = np.linalg.eigh(A)
    return EigenDecomposition(w, V)


def _clamped_spectrum(A) -> EigenDecomposition:
    w, V = eig_hermitian(A)
    if w[0] < -PSD_CLAMP_TOL:
        raise NotPSDError(f"matrix is not positive semidefinite: eigenvalue {w[0]:.3e}")
    return EigenDecomposition(np.clip(w, 0.0, None), V)


def default_rank_tol(eigenvalues: np.ndarray) -> float:
    return len(eigenvalues) * float(np.max(np.abs(eigenvalues))) * 1e-12


def psd_sqrt(A) -> np.ndarray:
    """Unique PSD square root.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero; anything more negative
    raises :class:`NotPSDError`. Eigenvalues below the default rank threshold
    are also zeroed, since rooting rounding noise of size 1e-17 gives 3e-9.
    """
    w, V = _clamped_spectrum(A)
    w = np.where(w > default_rank_tol(w), w, 0.0)
    return (V * np.sqrt(w)) @ V.conj().T


def pinv(A, rank_tol: Optional[float] = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a Hermitian matrix.

    Eigenvalues with ``|lambda| <= rank_tol`` are treated as exactly zero. The
    default threshold is ``dim * max|lambda| * 1e-12``.
    """
    w, V = eig_hermitian(A)
    tol = default_rank_tol(w) if rank_tol is None else rank_tol
    keep = np.abs(w) > tol
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return (V * inv) @ V.conj().T


def pinv_sqrt_with_kernel(A, rank_tol: Optional[float] = None):
    """``(psd_sqrt(pinv(A)), projector_kernel(A))`` for PSD ``A`` from one eigendecomposition.

    Composing the two functions re-diagonalises ``pinv(A)``, whose entries grow
    like ``1 / lambda_min``; for ill-conditioned ``A`` its rounding noise then
    exceeds the absolute PSD clamp. Here positivity is checked on ``A`` itself.
    """
    w, V = _clamped_spectrum(A)
    tol = default_rank_tol(w) if rank_tol is None else rank_tol
    keep = w > tol
    root = np.zeros_like(w)
    root[keep] = 1.0 / np.sqrt(w[keep])
    U = V[:, ~keep]
    return (V * root) @ V.conj().T, U @ U.conj().T


def pinv_sqrt(A, rank_tol: Optional[float] = None) -> np.ndarray:
    return pinv_sqrt_with_kernel(A, rank_tol)[0]


def _image_basis(A, rank_tol: Optional[float]) -> np.ndarray:
    w, V = eig_hermitian(A)
    tol = default_rank_tol(w) if rank_tol is None else rank_tol
    return V[:, np.abs(w) > tol]


def projector_image(A, rank_tol: Optional[float] = None) -> np.ndarray:
    """Orthogonal projection onto the image (support) of ``A``."""
    U = _image_basis(A, rank_tol)
    return U @ U.conj().T


def projector_kernel(A, rank_tol: Optional[float] = None) -> np.ndarray:
    """Orthogonal projection onto the kernel of ``A``: ``I - projector_image(A)``."""
    P = projector_image(A, rank_tol)
    return np.eye(P.shape[0], dtype=complex) - P


def kron(A, B, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Kronecker product with a dimension cap.

    Entry ``[j*dimB + k, l*dimB + m]`` of the result is ``A[j, l] * B[k, m]``.
    """
    A = as_square(A, "A")
    B = as_square(B, "B")
    dim = A.shape[0] * B.shape[0]
    if dim > max_dim:
        raise CapacityError(dim, max_dim)
    return np.kron(A, B)


def kron_power(A, n: int, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """``A ⊗ A ⊗ ... ⊗ A`` (``n`` factors)."""
    if n < 1:
        raise ValueError(f"number of copies must be >= 1, got {n}")
    A = as_square(A)
    required = A.shape[0] ** n
    if required > max_dim:
        raise CapacityError(required, max_dim)
    out = A
    for _ in range(n - 1):
        out = np.kron(out, A)
    return out


def partial_trace_first(A, dim_first: int) -> np.ndarray:
    """Trace out the first tensor factor of dimension ``dim_first``."""
    A = as_square(A)
    dim = A.shape[0]
    if dim_first < 1 or dim % dim_first:
        raise ShapeError(f"first-factor dimension {dim_first} does not divide {dim}")
    rest = dim // dim_first
    return np.einsum("ijil->jl", A.reshape(dim_first, rest, dim_first, rest))


def trace_norm(A) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(eig_hermitian(A).eigenvalues)))
