"""Tolerance-driven dense linear algebra.

All thresholds are relative to operand norms. The defaults in
``config.Tolerances`` are tuned for double precision at dimensions up to 64.
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import Tolerances
from .errors import (
    ConditioningError,
    InvalidValueError,
    ShapeError,
    SimultaneousDiagonalizationError,
)
from .sampling import complex_gaussian
from .utils import frobenius, hermitian_part

logger = logging.getLogger(__name__)

ROUNDING_SLACK = 100.0


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


@dataclass(frozen=True, eq=False)
class PsdCheck:
    is_psd: bool
    min_eigenvalue: float
    max_eigenvalue: float
    witness: np.ndarray


@dataclass(frozen=True, eq=False)
class JointEigenbasis:
    basis: np.ndarray
    # eigenvalues[j, n] = (U^dagger D_j U)_{nn}
    eigenvalues: np.ndarray
    residual: float
    attempts: int

    @cached_property
    def min_gap(self) -> float:
        """Smallest max-norm distance between two joint eigenvalue tuples."""
        count = self.basis.shape[1]
        if count < 2 or self.eigenvalues.size == 0:
            return math.inf
        gap = math.inf
        for a, b in itertools.combinations(range(count), 2):
            diff = float(np.max(np.abs(self.eigenvalues[:, a] - self.eigenvalues[:, b])))
            gap = min(gap, diff)
        return gap


def hermitian_eig(matrix: npt.ArrayLike) -> SpectralDecomposition:
    h = _square(matrix)
    eigenvalues, eigenvectors = scipy.linalg.eigh(hermitian_part(h))
    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def is_psd(matrix: npt.ArrayLike, tol: float = 1e-9) -> PsdCheck:
    spectrum = hermitian_eig(matrix)
    lowest = float(spectrum.eigenvalues[0])
    highest = float(spectrum.eigenvalues[-1])
    return PsdCheck(
        is_psd=lowest >= -tol * max(abs(highest), 1.0),
        min_eigenvalue=lowest,
        max_eigenvalue=highest,
        witness=spectrum.eigenvectors[:, 0],
    )


def rank(matrix: npt.ArrayLike, tol: float = 1e-9) -> int:
    values = scipy.linalg.svdvals(np.asarray(matrix, dtype=np.complex128))
    return _count_above(values, tol)


def kernel_basis(matrix: npt.ArrayLike, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal columns spanning the kernel; shape (dim, dim - rank)."""
    m = np.asarray(matrix, dtype=np.complex128)
    _, values, vh = scipy.linalg.svd(m)
    r = _count_above(values, tol)
    return vh[r:].conj().T


def psd_sqrt_invsqrt(
    matrix: npt.ArrayLike, tolerances: Tolerances | None = None
) -> tuple[np.ndarray, np.ndarray]:
    tolerances = tolerances or Tolerances()
    spectrum = hermitian_eig(matrix)
    lowest = float(spectrum.eigenvalues[0])
    highest = float(spectrum.eigenvalues[-1])
    if lowest <= 0 or highest / lowest > tolerances.cond_max:
        raise ConditioningError(lowest, highest)
    u = spectrum.eigenvectors
    root = np.sqrt(spectrum.eigenvalues)
    sqrt = hermitian_part((u * root) @ u.conj().T)
    inv_sqrt = hermitian_part((u / root) @ u.conj().T)
    return sqrt, inv_sqrt


def condition_number(matrix: npt.ArrayLike) -> float:
    """lambda_max / lambda_min of a Hermitian matrix; inf unless positive definite."""
    eigenvalues = hermitian_eig(matrix).eigenvalues
    lowest, highest = float(eigenvalues[0]), float(eigenvalues[-1])
    return highest / lowest if lowest > 0 else math.inf


def conditioned_tolerances(tolerances: Tolerances, condition: float, dim: int) -> Tolerances:
    """Raise simdiag_tol to the rounding floor of matrices read through F^{-1/2}.

    Conjugating by F^{-1/2} multiplies rounding errors by about cond(F), so
    commutators and off-diagonal parts of an exact family sit near
    eps * cond(F) * N instead of eps.
    """
    floor = ROUNDING_SLACK * np.finfo(float).eps * condition * dim
    if not floor > tolerances.simdiag_tol:
        return tolerances
    return replace(tolerances, simdiag_tol=floor)


def commutation_residual(family: Sequence[npt.ArrayLike]) -> float:
    """Worst ||[A, B]|| / (||A|| ||B||) and the same with B^dagger, A = B included.

    Zero members commute with everything and are skipped.
    """
    members = [d for d in _check_family(family) if frobenius(d) > 0.0]
    worst = 0.0
    for a in members:
        for b in members:
            scale = frobenius(a) * frobenius(b)
            b_dag = b.conj().T
            worst = max(
                worst,
                frobenius(a @ b - b @ a) / scale,
                frobenius(a @ b_dag - b_dag @ a) / scale,
            )
    return worst


def simultaneous_diagonalize(
    family: Sequence[npt.ArrayLike],
    tolerances: Tolerances | None = None,
    rng: np.random.Generator | None = None,
) -> JointEigenbasis:
    """Common unitary eigenbasis of a commuting normal family.

    A random complex combination of the family separates every joint
    eigenspace generically; degenerate clusters of its Hermitian part are
    refined with its anti-Hermitian part and then with the Hermitian
    components of each member.
    """
    tolerances = tolerances or Tolerances()
    rng = rng if rng is not None else np.random.default_rng(0)
    members = _check_family(family)
    if not members:
        raise InvalidValueError("Cannot diagonalize an empty family.")
    dim = members[0].shape[0]
    stacked = np.stack(members)
    components = [part for d in members for part in _hermitian_components(d)]

    best = math.inf
    for attempt in range(1, tolerances.simdiag_retries + 1):
        combo = np.tensordot(complex_gaussian(rng, len(members)), stacked, axes=1)
        ops = [*_hermitian_components(combo), *components]
        basis = _refine(np.eye(dim, dtype=np.complex128), ops, tolerances.simdiag_tol)
        residual = _offdiagonal_residual(basis, members)
        if residual <= tolerances.simdiag_tol:
            eigenvalues = np.array(
                [np.diagonal(basis.conj().T @ d @ basis) for d in members]
            )
            return JointEigenbasis(
                basis=basis, eigenvalues=eigenvalues, residual=residual, attempts=attempt
            )
        best = min(best, residual)
        logger.info(
            "Simultaneous diagonalization attempt %s/%s left residual %.3e",
            attempt,
            tolerances.simdiag_retries,
            residual,
        )
    raise SimultaneousDiagonalizationError(best, tolerances.simdiag_retries)


def _refine(basis: np.ndarray, ops: Sequence[np.ndarray], tol: float) -> np.ndarray:
    if basis.shape[1] == 1 or not ops:
        return basis
    op = ops[0]
    restricted = hermitian_part(basis.conj().T @ op @ basis)
    values, vectors = scipy.linalg.eigh(restricted)
    rotated = basis @ vectors
    threshold = tol * max(frobenius(op), np.finfo(float).tiny)
    cuts = np.flatnonzero(np.diff(values) > threshold) + 1
    clusters = np.split(np.arange(values.size), cuts)
    return np.hstack([_refine(rotated[:, cluster], ops[1:], tol) for cluster in clusters])


def _offdiagonal_residual(basis: np.ndarray, members: Sequence[np.ndarray]) -> float:
    worst = 0.0
    for d in members:
        norm = frobenius(d)
        if norm == 0.0:
            continue
        rotated = basis.conj().T @ d @ basis
        off = rotated - np.diag(np.diagonal(rotated))
        worst = max(worst, frobenius(off) / norm)
    return worst


def _hermitian_components(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    adjoint = matrix.conj().T
    return 0.5 * (matrix + adjoint), (matrix - adjoint) / 2j


def _count_above(values: np.ndarray, tol: float) -> int:
    if values.size == 0 or values[0] == 0.0:
        return 0
    return int(np.count_nonzero(values > tol * values[0]))


def _square(matrix: npt.ArrayLike) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"Expected a square matrix, got shape {arr.shape}.")
    return arr


def _check_family(family: Sequence[npt.ArrayLike]) -> list[np.ndarray]:
    members = [_square(d) for d in family]
    dims = {d.shape[0] for d in members}
    if len(dims) > 1:
        raise ShapeError(f"Family members have mismatched dimensions {sorted(dims)}.")
    return members
