"""Quantum state discrimination: ensembles, Helstrom measurement, Pretty Good Measurement."""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .encoding import copies_centroid
from .exceptions import InvalidEnsembleError, ShapeError
from .hermitian import (
    check_density_matrix,
    eig_hermitian,
    pinv_sqrt_with_kernel,
    trace_norm,
)

PRIOR_ATOL = 1e-10
EFFECT_ATOL = 1e-9
EIG_TOL = 1e-10


def _hermitize(A: np.ndarray) -> np.ndarray:
    return (A + A.conj().T) / 2


@dataclass(frozen=True)
class Ensemble:
    """Prior-weighted collection of density matrices ``{(p_i, rho_i)}``."""

    priors: Tuple[float, ...]
    states: Tuple[np.ndarray, ...]

    def __init__(self, priors: Sequence[float], states: Sequence, validate: bool = True):
        priors = tuple(float(p) for p in priors)
        states = tuple(np.asarray(rho, dtype=complex) for rho in states)
        if validate:
            _validate_ensemble(priors, states)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "states", states)

    @classmethod
    def uniform(cls, states: Sequence) -> "Ensemble":
        return cls([1.0 / len(states)] * len(states), states)

    @property
    def size(self) -> int:
        return len(self.priors)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def average_state(self) -> np.ndarray:
        sigma = np.zeros_like(self.states[0])
        for p, rho in zip(self.priors, self.states):
            sigma = sigma + p * rho
        return sigma

    def __iter__(self):
        return iter(zip(self.priors, self.states))


def _validate_ensemble(priors, states):
    if len(priors) != len(states):
        raise InvalidEnsembleError(f"{len(priors)} priors for {len(states)} states")
    if len(priors) < 2:
        raise InvalidEnsembleError("an ensemble needs at least two states")
    p = np.asarray(priors)
    if np.any(~np.isfinite(p)) or np.any(p <= 0) or np.any(p > 1):
        raise InvalidEnsembleError(f"priors must lie in (0, 1], got {list(priors)}")
    if abs(p.sum() - 1.0) > PRIOR_ATOL:
        raise InvalidEnsembleError(f"priors sum to {p.sum()!r}, expected 1")
    shape = states[0].shape
    for j, rho in enumerate(states):
        if rho.shape != shape:
            raise ShapeError(f"state {j} has shape {rho.shape}, expected {shape}")
        check_density_matrix(rho, name=f"state {j}")


@dataclass(frozen=True)
class Measurement:
    """A POVM: list of effects summing to the identity."""

    effects: Tuple[np.ndarray, ...]

    def __init__(self, effects: Sequence, validate: bool = True):
        effects = tuple(np.asarray(E, dtype=complex) for E in effects)
        object.__setattr__(self, "effects", effects)
        if validate:
            self.check()

    def __len__(self):
        return len(self.effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def check(self, atol: float = EFFECT_ATOL) -> None:
        """Raise ``ValueError`` unless every effect is in ``[0, I]`` and they sum to ``I``."""
        if not self.effects:
            raise InvalidEnsembleError("a measurement needs at least one effect")
        dim = self.effects[0].shape[0]
        for j, E in enumerate(self.effects):
            if E.shape != (dim, dim):
                raise ShapeError(f"effect {j} has shape {E.shape}")
            w = eig_hermitian(_hermitize(E)).eigenvalues
            if w[0] < -atol or w[-1] > 1 + atol:
                raise InvalidEnsembleError(
                    f"effect {j} has eigenvalues outside [0, 1]: [{w[0]:.3e}, {w[-1]:.3e}]")
        dev = completeness_error(self)
        if dev > atol:
            raise InvalidEnsembleError(f"effects do not sum to identity (max deviation {dev:.3e})")

    def probabilities(self, rho) -> np.ndarray:
        """Outcome probabilities ``tr(E_i rho)``."""
        rho = np.asarray(rho, dtype=complex)
        # tr(E rho) = sum_jk E[j,k] rho[k,j]
        return np.array([np.einsum("jk,kj->", E, rho).real for E in self.effects])


def completeness_error(M: Measurement) -> float:
    total = sum(M.effects)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))


@dataclass(frozen=True)
class HelstromResult:
    measurement: Measurement
    observable: np.ndarray
    bound: float

    @property
    def p_plus(self) -> np.ndarray:
        return self.measurement.effects[0]

    @property
    def p_minus(self) -> np.ndarray:
        return self.measurement.effects[1]


def _binary_priors(p1, p2):
    if abs(p1 + p2 - 1.0) > PRIOR_ATOL:
        raise InvalidEnsembleError(f"priors {p1}, {p2} do not sum to 1")


def helstrom(rho1, rho2, p1: float = 0.5, p2: float = 0.5,
             eig_tol: float = EIG_TOL) -> HelstromResult:
    """Optimal two-outcome measurement for ``{(p1, rho1), (p2, rho2)}``.

    ``P+`` collects the eigenvectors of ``p1*rho1 - p2*rho2`` with eigenvalue
    above ``eig_tol``; ``P- = I - P+`` so zero modes land in ``P-``.
    """
    _binary_priors(p1, p2)
    R = Ensemble([p1, p2], [rho1, rho2])
    rho1, rho2 = R.states
    Lam = p1 * rho1 - p2 * rho2
    w, V = eig_hermitian(Lam)
    U = V[:, w > eig_tol]
    P_plus = U @ U.conj().T
    P_minus = np.eye(Lam.shape[0], dtype=complex) - P_plus
    M = Measurement([P_plus, P_minus], validate=False)
    return HelstromResult(M, Lam, success_probability(R, M))


def helstrom_bound(rho1, rho2, p1: float = 0.5, p2: float = 0.5) -> float:
    return helstrom(rho1, rho2, p1, p2).bound


def helstrom_bound_trace_form(rho1, rho2, p1: float = 0.5, p2: float = 0.5) -> float:
    """Helstrom bound as ``(1 + ||p1 rho1 - p2 rho2||_1) / 2``."""
    _binary_priors(p1, p2)
    R = Ensemble([p1, p2], [rho1, rho2])
    return 0.5 * (1.0 + trace_norm(p1 * R.states[0] - p2 * R.states[1]))


@dataclass(frozen=True)
class PGMResult:
    """Pretty Good Measurement together with its intermediate operators.

    ``pre_effects`` are the operators before the kernel completion; they equal
    the effects exactly when ``kernel_projector`` vanishes.
    """

    measurement: Measurement
    pre_effects: Tuple[np.ndarray, ...]
    average_state: np.ndarray
    kernel_projector: np.ndarray

    @property
    def full_rank_sigma(self) -> bool:
        return float(np.trace(self.kernel_projector).real) < 1e-9


def pgm_details(R: Ensemble, rank_tol: Optional[float] = None) -> PGMResult:
    sigma = _hermitize(R.average_state())
    root, K = pinv_sqrt_with_kernel(sigma, rank_tol)
    ell = R.size
    pre, effects = [], []
    for p, rho in R:
        E = _hermitize(root @ (p * rho) @ root)
        pre.append(E)
        effects.append(E + K / ell)
    return PGMResult(Measurement(effects, validate=False), tuple(pre), sigma, K)


def pgm(R: Ensemble, rank_tol: Optional[float] = None) -> Measurement:
    """Pretty Good Measurement of ``R``, effects in class order.

    ``F_i = S p_i rho_i S + P_ker(sigma) / l`` with ``S`` the square root of the
    pseudoinverse of the average state ``sigma``.
    """
    return pgm_details(R, rank_tol).measurement


def success_probability(R: Ensemble, M: Measurement) -> float:
    """``sum_i p_i tr(M_i rho_i)``."""
    if len(M) != R.size:
        raise ShapeError(f"measurement has {len(M)} outcomes for {R.size} states")
    if M.dim != R.dim:
        raise ShapeError(f"measurement dimension {M.dim} does not match states ({R.dim})")
    return float(sum(p * np.einsum("jk,kj->", E, rho).real
                     for (p, rho), E in zip(R, M.effects)))


def pgm_bound(R: Ensemble) -> float:
    return success_probability(R, pgm(R))


def diagonal_qubit_state(r: float) -> np.ndarray:
    """``diag(1 - r, r)`` for a population ``r`` in ``[0, 1]``."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"population must lie in [0, 1], got {r}")
    return np.diag([1.0 - r, r]).astype(complex)


def diagonal_pgm_bound_closed_form(r1, r2, s1, s2) -> float:
    """Closed-form PGM bound of the uniform two-class diagonal qubit family."""
    t = r1 + r2 + s1 + s2
    return 2 * ((r1 + r2) * (s1 + s2 - 1) - s1 - s2) / (t * (t - 4))


def copy_bounds(class_states: Sequence[Sequence], copies: Sequence[int],
                priors: Optional[Sequence[float]] = None, kind: str = "pgm") -> List[float]:
    """Bound of the n-copy centroid ensemble for each ``n`` in ``copies``.

    ``class_states[i]`` lists the member states of class ``i``; members are
    weighted uniformly inside a class.
    """
    if priors is None:
        counts = np.array([len(c) for c in class_states], dtype=float)
        priors = counts / counts.sum()
    out = []
    for n in copies:
        cents = [copies_centroid(c, n) for c in class_states]
        if kind == "helstrom":
            out.append(helstrom(cents[0], cents[1], priors[0], priors[1]).bound)
        else:
            out.append(pgm_bound(Ensemble(priors, cents)))
    return out
