"""PPT checks, product-basis search and explicit separable decompositions.

``analyze`` runs the whole pipeline: rank gate, PPT check, optional tail
compression, search for a product vector whose compression has rank N, a
local rotation sending it to the top computational vector, canonical-form
extraction, joint diagonalization of the D-table, and a pull-back of every
product vector through the inverse rotations. A SEPARABLE verdict is only
returned after the decomposition reproduces the original state.
"""

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
import numpy.typing as npt

from .canonical import CanonicalForm, ValidationReport, extract, validate
from .config import Tolerances
from .enums import PptMode, VerdictKind
from .ensemble import ProductEnsemble, ProductTerm, make_term
from .errors import (
    CanonicalFormViolation,
    CanonicalPptError,
    ConditioningError,
    RankConditionError,
    ShapeError,
    SimultaneousDiagonalizationError,
)
from .multilinear import (
    DensityMatrix,
    SystemShape,
    apply_local,
    compress_tail,
    partial_transpose,
    product_compression,
    reduced_tail,
    rotation_to_top,
)
from .numerics import (
    PsdCheck,
    condition_number,
    conditioned_tolerances,
    hermitian_eig,
    is_psd,
    psd_sqrt_invsqrt,
    rank,
    simultaneous_diagonalize,
)
from .oracle import brute_reconstruct
from .sampling import haar_vector, make_rng
from .utils import relative_residual

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PptEntry:
    subsystems: tuple[int, ...]
    check: PsdCheck


@dataclass(frozen=True, eq=False)
class PptReport:
    mode: PptMode
    entries: tuple[PptEntry, ...]

    @property
    def passed(self) -> bool:
        return all(entry.check.is_psd for entry in self.entries)

    @property
    def worst(self) -> PptEntry:
        return min(self.entries, key=lambda entry: entry.check.min_eigenvalue)


@dataclass(frozen=True, eq=False)
class SeparabilityCertificate:
    ensemble: ProductEnsemble
    reconstruction_residual: float
    basis_used: tuple[np.ndarray, ...]
    diagnostics: ValidationReport
    tolerances: Tolerances
    trace: float
    tail_compressed: bool = False


@dataclass(frozen=True, eq=False)
class Separable:
    kind: ClassVar[VerdictKind] = VerdictKind.SEPARABLE
    certificate: SeparabilityCertificate


@dataclass(frozen=True, eq=False)
class NotPpt:
    kind: ClassVar[VerdictKind] = VerdictKind.NOT_PPT
    subsystems: tuple[int, ...]
    eigenvalue: float
    witness: np.ndarray


@dataclass(frozen=True)
class RankConditionUnmet:
    kind: ClassVar[VerdictKind] = VerdictKind.RANK_CONDITION_UNMET
    rank: int
    tail_dim: int
    attempts: int = 0


@dataclass(frozen=True)
class Inconclusive:
    kind: ClassVar[VerdictKind] = VerdictKind.INCONCLUSIVE
    reason: str
    residuals: dict[str, float] = field(default_factory=dict)
    attempts: int = 0


AnalysisVerdict = Separable | NotPpt | RankConditionUnmet | Inconclusive


@dataclass(frozen=True)
class AnalysisConfig:
    tolerances: Tolerances = field(default_factory=Tolerances)
    attempts: int = 64
    ppt_mode: PptMode = PptMode.SINGLE_SUBSYSTEMS
    tail_compression: bool = False
    seed: int = 0


@dataclass(frozen=True)
class CertificateCheck:
    passed: bool
    residual: float
    weight_residual: float
    norm_error: float


def transpose_patterns(shape: SystemShape, mode: PptMode) -> list[tuple[int, ...]]:
    parties = shape.num_front + 1
    if PptMode(mode) is PptMode.SINGLE_SUBSYSTEMS:
        return [(party,) for party in range(1, parties + 1)]
    # a subset and its complement give spectrally equivalent transposes
    return [
        subset
        for size in range(1, parties // 2 + 1)
        for subset in itertools.combinations(range(1, parties + 1), size)
    ]


def check_ppt(
    rho: DensityMatrix,
    mode: PptMode = PptMode.SINGLE_SUBSYSTEMS,
    tolerances: Tolerances | None = None,
) -> PptReport:
    tolerances = tolerances or Tolerances()
    entries = tuple(
        PptEntry(
            subsystems=pattern,
            check=is_psd(partial_transpose(rho, pattern), tolerances.psd_tol),
        )
        for pattern in transpose_patterns(rho.shape, PptMode(mode))
    )
    return PptReport(mode=PptMode(mode), entries=entries)


def find_full_rank_product_basis(
    rho: DensityMatrix,
    attempts: int,
    rng: np.random.Generator,
    tolerances: Tolerances | None = None,
) -> tuple[np.ndarray, ...] | None:
    """First product vector whose compression of rho has rank N.

    The computational product vectors are swept in lexicographic order before
    ``attempts`` Haar-random product vectors are drawn.
    """
    vectors, _ = _search_product_basis(rho, attempts, rng, tolerances or Tolerances())
    return vectors


def decompose_canonical(
    cf: CanonicalForm,
    tolerances: Tolerances | None = None,
    rng: np.random.Generator | None = None,
) -> ProductEnsemble:
    """Product terms from the joint eigenbasis u_n of the D-table.

    Term n has local vector i with entry conj(a^n_{i,(K_i-1)-b_i}) at index
    b_i (a^n_{i,0} = 1) and tail vector sqrt(F) u_n.
    """
    tolerances = tolerances or Tolerances()
    joint = simultaneous_diagonalize(cf.family(), tolerances, rng)
    sqrt_f, _ = psd_sqrt_invsqrt(cf.f, tolerances)
    rows = {key: row for row, key in enumerate(cf.keys)}

    terms: list[ProductTerm] = []
    for n in range(cf.shape.tail_dim):
        local = []
        for i, k in enumerate(cf.shape.front_dims, 1):
            v = np.ones(k, dtype=np.complex128)
            for level in range(1, k):
                v[(k - 1) - level] = np.conj(joint.eigenvalues[rows[(i, level)], n])
            local.append(v)
        terms.append(make_term(1.0, local, sqrt_f @ joint.basis[:, n]))
    return ProductEnsemble(shape=cf.shape, terms=tuple(terms))


def analyze(rho: DensityMatrix, config: AnalysisConfig | None = None) -> AnalysisVerdict:
    config = config or AnalysisConfig()
    tol = config.tolerances
    rng = make_rng(config.seed)
    shape = rho.shape
    n = shape.tail_dim

    rho_rank = rank(rho.matrix, tol.rank_rel_tol)
    if rho_rank > n:
        logger.info("rank(rho)=%s exceeds N=%s", rho_rank, n)
        return RankConditionUnmet(rank=rho_rank, tail_dim=n)

    ppt = check_ppt(rho, config.ppt_mode, tol)
    if not ppt.passed:
        worst = ppt.worst
        logger.info("Partial transpose over %s is not PSD", worst.subsystems)
        return NotPpt(
            subsystems=worst.subsystems,
            eigenvalue=worst.check.min_eigenvalue,
            witness=worst.check.witness,
        )

    working = rho
    tail_basis = None
    if rho_rank < n:
        tail_basis = _tail_support(rho, rho_rank, tol) if config.tail_compression else None
        if tail_basis is None:
            return RankConditionUnmet(rank=rho_rank, tail_dim=n)
        working = compress_tail(rho, tail_basis)
        logger.info("Compressed tail from %s to %s dimensions", n, rho_rank)

    vectors, tried = _search_product_basis(working, config.attempts, rng, tol)
    if vectors is None:
        return Inconclusive(
            reason="no product vector with a full-rank compression was found",
            attempts=tried,
        )

    rotations = [rotation_to_top(v) for v in vectors]
    rotated = apply_local(working, rotations, tol.cond_max)
    try:
        cf = extract(rotated, tol)
    except RankConditionError as exc:
        logger.info("Rank condition failed after rotation: %s", exc)
        return RankConditionUnmet(rank=exc.rank, tail_dim=exc.tail_dim, attempts=tried)
    except CanonicalPptError as exc:
        logger.info("Canonical extraction failed: %s", exc)
        return Inconclusive(reason=str(exc), residuals=_error_residuals(exc), attempts=tried)

    conditioned = conditioned_tolerances(tol, condition_number(cf.f), cf.shape.tail_dim)
    report = validate(cf, rotated, conditioned, rng)
    if not report.is_canonical(conditioned):
        return Inconclusive(
            reason="canonical-form relations violated",
            residuals={
                "block_residual": report.block_residual,
                "commutation_residual": report.commutation_residual,
            },
            attempts=tried,
        )

    try:
        rotated_ensemble = decompose_canonical(cf, conditioned, rng)
    except SimultaneousDiagonalizationError as exc:
        return Inconclusive(
            reason=str(exc), residuals={"simdiag_residual": exc.best_residual}, attempts=tried
        )

    ensemble = _pull_back(rotated_ensemble, rotations, tail_basis, shape)
    residual = relative_residual(brute_reconstruct(ensemble, shape), rho.matrix)
    if residual > tol.residual_tol:
        return Inconclusive(
            reason="reconstruction residual above tolerance",
            residuals={"reconstruction_residual": residual},
            attempts=tried,
        )

    certificate = SeparabilityCertificate(
        ensemble=ensemble,
        reconstruction_residual=residual,
        basis_used=tuple(vectors),
        diagnostics=report,
        tolerances=tol,
        trace=rho.trace,
        tail_compressed=tail_basis is not None,
    )
    logger.info("Certified separable with %s terms, residual %.3e", len(ensemble), residual)
    return Separable(certificate=certificate)


def verify_certificate(
    rho: DensityMatrix,
    certificate: SeparabilityCertificate,
    tolerances: Tolerances | None = None,
) -> CertificateCheck:
    tolerances = tolerances or Tolerances()
    ensemble = certificate.ensemble
    if ensemble.shape != rho.shape:
        raise ShapeError(f"Certificate shape {ensemble.shape.dims} != state {rho.shape.dims}.")
    ensemble.check()
    residual = relative_residual(brute_reconstruct(ensemble, rho.shape), rho.matrix)
    trace = rho.trace
    weight_residual = abs(ensemble.total_weight - trace) / (abs(trace) or 1.0)
    norm_error = ensemble.max_norm_error()
    passed = residual <= tolerances.residual_tol and norm_error <= tolerances.residual_tol
    return CertificateCheck(
        passed=passed,
        residual=residual,
        weight_residual=weight_residual,
        norm_error=norm_error,
    )


def _tail_support(
    rho: DensityMatrix, rho_rank: int, tolerances: Tolerances
) -> np.ndarray | None:
    if rho_rank == 0:
        return None
    marginal = reduced_tail(rho)
    if rank(marginal, tolerances.rank_rel_tol) != rho_rank:
        return None
    # eigh is ascending: the support is spanned by the last rho_rank columns
    return hermitian_eig(marginal).eigenvectors[:, -rho_rank:]


def _pull_back(
    ensemble: ProductEnsemble,
    rotations: Sequence[npt.ArrayLike],
    tail_basis: np.ndarray | None,
    shape: SystemShape,
) -> ProductEnsemble:
    inverses = [np.asarray(r).conj().T for r in rotations]
    terms = []
    for term in ensemble.terms:
        local = [inv @ v for inv, v in zip(inverses, term.local_vectors, strict=True)]
        tail = term.tail_vector if tail_basis is None else tail_basis @ term.tail_vector
        terms.append(make_term(term.weight, local, tail))
    return ProductEnsemble(shape=shape, terms=tuple(terms))


def _error_residuals(exc: CanonicalPptError) -> dict[str, float]:
    match exc:
        case CanonicalFormViolation():
            return {"block_residual": exc.residual}
        case ConditioningError():
            return {"lambda_min": exc.lambda_min, "lambda_max": exc.lambda_max}
        case _:
            return {}


def _search_product_basis(
    rho: DensityMatrix,
    attempts: int,
    rng: np.random.Generator,
    tolerances: Tolerances,
) -> tuple[tuple[np.ndarray, ...] | None, int]:
    """The first full-rank product vector and how many vectors were tried."""
    shape = rho.shape
    target = shape.tail_dim
    tried = 0

    for b in shape.front_indices():
        tried += 1
        vectors = tuple(
            np.eye(k, dtype=np.complex128)[b_i]
            for b_i, k in zip(b, shape.front_dims, strict=True)
        )
        if rank(product_compression(rho, vectors), tolerances.rank_rel_tol) == target:
            logger.debug("Computational product vector %s has a full-rank compression", b)
            return vectors, tried

    for attempt in range(1, attempts + 1):
        tried += 1
        vectors = tuple(haar_vector(rng, k) for k in shape.front_dims)
        if rank(product_compression(rho, vectors), tolerances.rank_rel_tol) == target:
            logger.debug("Random product vector found on attempt %s", attempt)
            return vectors, tried
    logger.info("No full-rank product compression after %s random attempts", attempts)
    return None, tried
