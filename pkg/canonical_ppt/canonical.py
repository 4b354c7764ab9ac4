"""The canonical form rho = sqrt(F) T^dagger T sqrt(F).

T is the tensor product over front subsystems i of the row blocks
(D^i_{K_i-1}, ..., D^i_1, I), so the N x N block of rho at (b, b') is
sqrt(F) S_b^dagger S_b' sqrt(F) with S_b = prod_i D^i_{(K_i-1)-b_i} and
D^i_0 = I. The square root is read as I_S x sqrt(F).
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from .config import Tolerances
from .errors import (
    CanonicalFormViolation,
    HermiticityError,
    InvalidValueError,
    RankConditionError,
    ShapeError,
    SimultaneousDiagonalizationError,
)
from .multilinear import (
    ComplexMatrix,
    DensityMatrix,
    FrontMultiIndex,
    SystemShape,
    block,
    partial_transpose,
)
from .numerics import (
    commutation_residual,
    kernel_basis,
    psd_sqrt_invsqrt,
    rank,
    simultaneous_diagonalize,
)
from .sampling import complex_gaussian, haar_unitary, log_uniform_spectrum
from .utils import frobenius, hermitian_part

logger = logging.getLogger(__name__)

DKey = tuple[int, int]


def table_keys(shape: SystemShape) -> list[DKey]:
    """(subsystem, level) pairs in subsystem-major order, levels 1..K_i-1."""
    return [(i, j) for i, k in enumerate(shape.front_dims, 1) for j in range(1, k)]


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    shape: SystemShape
    d_table: Mapping[DKey, ComplexMatrix] = field(repr=False)
    f: ComplexMatrix = field(repr=False)

    def __post_init__(self) -> None:
        n = self.shape.tail_dim
        expected = table_keys(self.shape)
        if sorted(self.d_table) != expected:
            raise ShapeError(
                f"D-table keys {sorted(self.d_table)} do not match shape {self.shape.dims}."
            )
        table: dict[DKey, np.ndarray] = {}
        for key in expected:
            d = np.array(self.d_table[key], dtype=np.complex128)
            if d.shape != (n, n):
                raise ShapeError(f"D{key} must be {n}x{n}, got {d.shape}.")
            d.setflags(write=False)
            table[key] = d
        f = np.array(self.f, dtype=np.complex128)
        if f.shape != (n, n):
            raise ShapeError(f"F must be {n}x{n}, got {f.shape}.")
        asym = f - f.conj().T
        if frobenius(asym) > Tolerances().psd_tol * max(frobenius(f), np.finfo(float).tiny):
            row, col = np.unravel_index(int(np.argmax(np.abs(asym))), asym.shape)
            raise HermiticityError(int(row), int(col), float(np.abs(asym[row, col])))
        f = hermitian_part(f)
        f.setflags(write=False)
        object.__setattr__(self, "d_table", table)
        object.__setattr__(self, "f", f)

    def d(self, subsystem: int, level: int) -> ComplexMatrix:
        if level == 0:
            return np.eye(self.shape.tail_dim, dtype=np.complex128)
        return self.d_table[(subsystem, level)]

    @property
    def keys(self) -> list[DKey]:
        return table_keys(self.shape)

    def family(self) -> list[ComplexMatrix]:
        return [self.d_table[key] for key in self.keys]


@dataclass(frozen=True)
class ValidationReport:
    block_residual: float
    worst_block: tuple[FrontMultiIndex, FrontMultiIndex]
    delta_residual: float
    commutation_residual: float
    min_joint_gap: float
    kernel_transpose_residual: float | None = None

    def is_canonical(self, tolerances: Tolerances) -> bool:
        return (
            self.block_residual <= tolerances.residual_tol
            and self.commutation_residual <= tolerances.simdiag_tol
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "block_residual": self.block_residual,
            "worst_block": [list(self.worst_block[0]), list(self.worst_block[1])],
            "delta_residual": self.delta_residual,
            "commutation_residual": self.commutation_residual,
            "min_joint_gap": self.min_joint_gap,
            "kernel_transpose_residual": self.kernel_transpose_residual,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ValidationReport":
        row, col = data["worst_block"]
        kernel = data.get("kernel_transpose_residual")
        gap = data.get("min_joint_gap")
        return cls(
            block_residual=float(data["block_residual"]),
            worst_block=(tuple(int(x) for x in row), tuple(int(x) for x in col)),
            delta_residual=float(data["delta_residual"]),
            commutation_residual=float(data["commutation_residual"]),
            min_joint_gap=float("inf") if gap is None else float(gap),
            kernel_transpose_residual=None if kernel is None else float(kernel),
        )


def selector(cf: CanonicalForm, b: Sequence[int]) -> ComplexMatrix:
    """S_b = prod_i D^i_{(K_i-1)-b_i}; the identity at the top multi-index."""
    cf.shape.check_front_index(b)
    result = np.eye(cf.shape.tail_dim, dtype=np.complex128)
    for i, (b_i, k) in enumerate(zip(b, cf.shape.front_dims, strict=True), 1):
        level = (k - 1) - b_i
        if level:
            result = result @ cf.d(i, level)
    return result


def assemble_rho(
    cf: CanonicalForm,
    tolerances: Tolerances | None = None,
    *,
    normalize: bool = False,
) -> DensityMatrix:
    tolerances = tolerances or Tolerances()
    sqrt_f, _ = psd_sqrt_invsqrt(cf.f, tolerances)
    matrix = _model_matrix(cf, sqrt_f)
    n = cf.shape.tail_dim
    top = cf.shape.front_flat(cf.shape.top_index) * n
    matrix[top : top + n, top : top + n] = cf.f
    state = DensityMatrix(cf.shape, matrix)
    return state.normalize() if normalize else state


def extract(rho: DensityMatrix, tolerances: Tolerances | None = None) -> CanonicalForm:
    """Read {D^i_j, F} off the blocks of rho in the given basis."""
    tolerances = tolerances or Tolerances()
    shape = rho.shape
    n = shape.tail_dim
    top = shape.top_index
    f = hermitian_part(block(rho, top, top))
    rho_rank = rank(rho.matrix, tolerances.rank_rel_tol)
    block_rank = rank(f, tolerances.rank_rel_tol)
    if rho_rank != n or block_rank != n:
        raise RankConditionError(rho_rank, block_rank, n)
    sqrt_f, inv_sqrt_f = psd_sqrt_invsqrt(f, tolerances)

    table: dict[DKey, np.ndarray] = {}
    for i, j in table_keys(shape):
        b = list(top)
        b[i - 1] = (shape.front_dims[i - 1] - 1) - j
        table[(i, j)] = inv_sqrt_f @ block(rho, top, b) @ inv_sqrt_f
    cf = CanonicalForm(shape=shape, d_table=table, f=f)

    residual, worst = _block_residuals(cf, rho, sqrt_f)
    if residual > tolerances.residual_tol:
        raise CanonicalFormViolation(worst, residual)
    logger.debug("Extracted canonical form with block residual %.3e", residual)
    return cf


def validate(
    cf: CanonicalForm,
    rho: DensityMatrix,
    tolerances: Tolerances | None = None,
    rng: np.random.Generator | None = None,
    *,
    kernel_check: bool = False,
) -> ValidationReport:
    tolerances = tolerances or Tolerances()
    if cf.shape != rho.shape:
        raise ShapeError(f"Shapes differ: {cf.shape.dims} vs {rho.shape.dims}.")
    sqrt_f, _ = psd_sqrt_invsqrt(cf.f, tolerances)
    residual, worst = _block_residuals(cf, rho, sqrt_f)

    bottom = tuple(0 for _ in cf.shape.front_dims)
    s = selector(cf, bottom)
    expected = sqrt_f @ s.conj().T @ s @ sqrt_f
    delta = frobenius(block(rho, bottom, bottom) - expected) / _scale(rho)

    family = cf.family()
    try:
        gap = simultaneous_diagonalize(family, tolerances, rng).min_gap
    except SimultaneousDiagonalizationError:
        gap = float("nan")

    return ValidationReport(
        block_residual=residual,
        worst_block=worst,
        delta_residual=delta,
        commutation_residual=commutation_residual(family),
        min_joint_gap=gap,
        kernel_transpose_residual=(
            kernel_transpose_residual(rho, tolerances) if kernel_check else None
        ),
    )


def kernel_transpose_residual(rho: DensityMatrix, tolerances: Tolerances) -> float:
    """max ||rho^{T_l} v|| / ||rho|| over kernel vectors v of rho and single subsystems l."""
    kernel = kernel_basis(rho.matrix, tolerances.rank_rel_tol)
    if kernel.shape[1] == 0:
        return 0.0
    worst = 0.0
    for subsystem in range(1, rho.shape.num_front + 2):
        image = partial_transpose(rho, subsystem) @ kernel
        worst = max(worst, float(np.max(np.linalg.norm(image, axis=0))))
    return worst / _scale(rho)


def sample_canonical(
    shape: SystemShape,
    rng: np.random.Generator,
    *,
    eigenvalue_scale: float = 1.0,
    condition_target: float = 10.0,
) -> CanonicalForm:
    """Random instance: one shared Haar eigenbasis for every D, Haar-rotated F."""
    if condition_target < 1.0:
        raise InvalidValueError("condition_target must be at least 1.")
    n = shape.tail_dim
    shared = haar_unitary(rng, n)
    table: dict[DKey, np.ndarray] = {}
    for key in table_keys(shape):
        eigenvalues = eigenvalue_scale * complex_gaussian(rng, n)
        table[key] = (shared * eigenvalues) @ shared.conj().T
    rotation = haar_unitary(rng, n)
    spectrum = log_uniform_spectrum(rng, n, condition_target)
    f = (rotation * spectrum) @ rotation.conj().T
    return CanonicalForm(shape=shape, d_table=table, f=f)


def drop_subsystem(cf: CanonicalForm, subsystem: int) -> CanonicalForm:
    """The form of <K_i-1|_i rho |K_i-1>_i: every D^i_j is removed."""
    reduced = cf.shape.without_front(subsystem)
    table: dict[DKey, np.ndarray] = {}
    for (i, j), d in cf.d_table.items():
        if i == subsystem:
            continue
        table[(i - 1 if i > subsystem else i, j)] = d
    return CanonicalForm(shape=reduced, d_table=table, f=cf.f)


def diagonal_form(
    shape: SystemShape,
    diagonals: Mapping[DKey, npt.ArrayLike],
    f_diagonal: npt.ArrayLike,
) -> CanonicalForm:
    """Convenience constructor for forms whose D's and F are diagonal."""
    return CanonicalForm(
        shape=shape,
        d_table={key: np.diag(np.asarray(v, dtype=np.complex128)) for key, v in diagonals.items()},
        f=np.diag(np.asarray(f_diagonal, dtype=np.complex128)),
    )


def _model_matrix(cf: CanonicalForm, sqrt_f: np.ndarray) -> np.ndarray:
    # rho = X^dagger X with X = (S_b sqrt(F))_b laid out as an N x SN row
    x = np.hstack([selector(cf, b) @ sqrt_f for b in cf.shape.front_indices()])
    return hermitian_part(x.conj().T @ x)


def _block_residuals(
    cf: CanonicalForm, rho: DensityMatrix, sqrt_f: np.ndarray
) -> tuple[float, tuple[FrontMultiIndex, FrontMultiIndex]]:
    s, n = cf.shape.front_size, cf.shape.tail_dim
    diff = (rho.matrix - _model_matrix(cf, sqrt_f)).reshape(s, n, s, n)
    per_block = np.linalg.norm(diff, axis=(1, 3)) / _scale(rho)
    row, col = np.unravel_index(int(np.argmax(per_block)), per_block.shape)
    worst = (
        tuple(int(x) for x in np.unravel_index(row, cf.shape.front_dims)),
        tuple(int(x) for x in np.unravel_index(col, cf.shape.front_dims)),
    )
    return float(per_block[row, col]), worst


def _scale(rho: DensityMatrix) -> float:
    return rho.norm if rho.norm > 0 else 1.0
