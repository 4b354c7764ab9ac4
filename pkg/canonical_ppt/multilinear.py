"""Index algebra and subsystem-local operations on multipartite matrices.

Basis ordering is row-major: front subsystem 1 is the most significant index
and the tail subsystem C^N is always the last, least significant factor.
Subsystems are numbered from 1; the tail is subsystem m + 1.
"""

import itertools
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import Tolerances
from .errors import (
    HermiticityError,
    InvalidValueError,
    PsdViolationError,
    ShapeError,
    SingularLocalOperatorError,
    TraceError,
)
from .utils import frobenius, hermitian_part

ComplexMatrix = npt.NDArray[np.complex128]
FrontMultiIndex = tuple[int, ...]


@dataclass(frozen=True)
class SystemShape:
    front_dims: tuple[int, ...]
    tail_dim: int

    def __post_init__(self) -> None:
        front = tuple(int(k) for k in self.front_dims)
        object.__setattr__(self, "front_dims", front)
        if not front:
            raise ShapeError("At least one front subsystem is required.")
        if any(k < 2 for k in front):
            raise ShapeError(f"Front dimensions must be at least 2, got {front}.")
        if int(self.tail_dim) < 1:
            raise ShapeError(f"Tail dimension must be at least 1, got {self.tail_dim}.")
        object.__setattr__(self, "tail_dim", int(self.tail_dim))

    @classmethod
    def from_dims(cls, dims: Sequence[int]) -> "SystemShape":
        """Build from a flat list with the tail dimension last."""
        if len(dims) < 2:
            raise ShapeError("dims needs at least one front dimension and the tail dimension.")
        return cls(front_dims=tuple(dims[:-1]), tail_dim=dims[-1])

    @property
    def num_front(self) -> int:
        return len(self.front_dims)

    @property
    def front_size(self) -> int:
        return math.prod(self.front_dims)

    @property
    def total_dim(self) -> int:
        return self.front_size * self.tail_dim

    @property
    def dims(self) -> tuple[int, ...]:
        return (*self.front_dims, self.tail_dim)

    @property
    def top_index(self) -> FrontMultiIndex:
        return tuple(k - 1 for k in self.front_dims)

    def front_indices(self) -> Iterator[FrontMultiIndex]:
        """All front multi-indices in lexicographic (row-major) order."""
        return itertools.product(*(range(k) for k in self.front_dims))

    def front_flat(self, b: Sequence[int]) -> int:
        self.check_front_index(b)
        return int(np.ravel_multi_index(tuple(b), self.front_dims))

    def check_front_index(self, b: Sequence[int]) -> None:
        if len(b) != self.num_front:
            raise ShapeError(f"Expected {self.num_front} front indices, got {len(b)}.")
        for pos, (value, bound) in enumerate(zip(b, self.front_dims, strict=True)):
            if not 0 <= value < bound:
                raise ShapeError(
                    f"Front index {pos + 1} out of range: {value} not in [0, {bound})."
                )

    def check_subsystem(self, subsystem: int) -> None:
        if not 1 <= subsystem <= self.num_front + 1:
            raise ShapeError(
                f"Subsystem must be in 1..{self.num_front + 1}, got {subsystem}."
            )

    def without_front(self, subsystem: int) -> "SystemShape":
        if not 1 <= subsystem <= self.num_front:
            raise ShapeError(f"Front subsystem must be in 1..{self.num_front}.")
        if self.num_front == 1:
            raise ShapeError("Cannot remove the only front subsystem.")
        front = self.front_dims[: subsystem - 1] + self.front_dims[subsystem:]
        return SystemShape(front_dims=front, tail_dim=self.tail_dim)

    def with_tail(self, tail_dim: int) -> "SystemShape":
        return SystemShape(front_dims=self.front_dims, tail_dim=tail_dim)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    shape: SystemShape
    matrix: ComplexMatrix = field(repr=False)
    normalized: bool = False

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.complex128)
        dim = self.shape.total_dim
        if matrix.shape != (dim, dim):
            raise ShapeError(
                f"Matrix of shape {matrix.shape} does not match dims {self.shape.dims} "
                f"(expected {dim}x{dim})."
            )
        if not np.all(np.isfinite(matrix)):
            raise InvalidValueError("Density matrix has non-finite entries.")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_array(
        cls,
        shape: SystemShape,
        matrix: npt.ArrayLike,
        *,
        normalized: bool = False,
        tolerances: Tolerances | None = None,
    ) -> "DensityMatrix":
        """Construct and check Hermiticity, positivity and (optionally) the trace."""
        state = cls(shape=shape, matrix=np.asarray(matrix), normalized=normalized)
        state.check(tolerances or Tolerances())
        return state

    @property
    def dim(self) -> int:
        return self.shape.total_dim

    @cached_property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @cached_property
    def norm(self) -> float:
        return frobenius(self.matrix)

    def check(self, tolerances: Tolerances) -> None:
        self.check_hermitian(tolerances.psd_tol)
        self.check_psd(tolerances.psd_tol)
        if self.normalized and abs(self.trace - 1.0) > tolerances.psd_tol:
            raise TraceError(f"Normalized state has trace {self.trace!r}.")

    def check_hermitian(self, tol: float) -> None:
        asym = self.matrix - self.matrix.conj().T
        if frobenius(asym) <= tol * max(self.norm, np.finfo(float).tiny):
            return
        row, col = np.unravel_index(int(np.argmax(np.abs(asym))), asym.shape)
        raise HermiticityError(int(row), int(col), float(np.abs(asym[row, col])))

    def check_psd(self, tol: float) -> None:
        eigenvalues, eigenvectors = scipy.linalg.eigh(hermitian_part(self.matrix))
        lowest, highest = float(eigenvalues[0]), float(eigenvalues[-1])
        if lowest < -tol * max(abs(highest), 1.0):
            raise PsdViolationError(lowest, eigenvectors[:, 0].tolist())

    def normalize(self) -> "DensityMatrix":
        if self.trace <= 0:
            raise TraceError("Cannot normalize a state with non-positive trace.")
        return DensityMatrix(self.shape, self.matrix / self.trace, normalized=True)


def composite_index(shape: SystemShape, b: Sequence[int], n: int) -> int:
    shape.check_front_index(b)
    if not 0 <= n < shape.tail_dim:
        raise ShapeError(f"Tail index {n} out of range [0, {shape.tail_dim}).")
    return int(np.ravel_multi_index((*b, n), shape.dims))


def kron(*matrices: npt.ArrayLike) -> np.ndarray:
    if not matrices:
        raise InvalidValueError("kron needs at least one operand.")
    return reduce(np.kron, (np.asarray(m) for m in matrices))


def partial_transpose(rho: DensityMatrix, subsystems: int | Iterable[int]) -> ComplexMatrix:
    """Transpose the indices of the given subsystem(s) only."""
    targets = (subsystems,) if isinstance(subsystems, int) else tuple(subsystems)
    for subsystem in targets:
        rho.shape.check_subsystem(subsystem)
    return transpose_subsystems(rho.matrix, rho.shape.dims, targets)


def transpose_subsystems(
    matrix: npt.ArrayLike, dims: Sequence[int], subsystems: Iterable[int]
) -> ComplexMatrix:
    arr = np.asarray(matrix, dtype=np.complex128)
    count = len(dims)
    tensor = arr.reshape(tuple(dims) * 2)
    axes = list(range(2 * count))
    for subsystem in set(subsystems):
        pos = subsystem - 1
        axes[pos], axes[count + pos] = axes[count + pos], axes[pos]
    return tensor.transpose(axes).reshape(arr.shape)


def block(rho: DensityMatrix, b: Sequence[int], b_prime: Sequence[int]) -> ComplexMatrix:
    """The N x N sub-block <b|rho|b'>."""
    n = rho.shape.tail_dim
    row = rho.shape.front_flat(b) * n
    col = rho.shape.front_flat(b_prime) * n
    return np.array(rho.matrix[row : row + n, col : col + n])


def product_vector(vectors: Sequence[npt.ArrayLike]) -> np.ndarray:
    return kron(*(np.asarray(v, dtype=np.complex128).reshape(-1) for v in vectors))


def product_compression(
    rho: DensityMatrix, vectors: Sequence[npt.ArrayLike]
) -> ComplexMatrix:
    """<e_1,...,e_m| rho |e_1,...,e_m> as an N x N matrix."""
    shape = rho.shape
    local = _check_local_vectors(shape, vectors)
    e = product_vector(local)
    s, n = shape.front_size, shape.tail_dim
    tensor = rho.matrix.reshape(s, n, s, n)
    compressed = np.einsum("a,anbm,b->nm", e.conj(), tensor, e)
    return hermitian_part(compressed)


def apply_local(
    rho: DensityMatrix,
    operators: Sequence[npt.ArrayLike],
    cond_max: float = 1e12,
) -> DensityMatrix:
    """(L_1 x ... x L_m x I_N) rho (L_1 x ... x L_m x I_N)^dagger."""
    shape = rho.shape
    if len(operators) != shape.num_front:
        raise ShapeError(f"Expected {shape.num_front} local operators, got {len(operators)}.")
    local: list[np.ndarray] = []
    for subsystem, (op, k) in enumerate(zip(operators, shape.front_dims, strict=True), 1):
        arr = np.asarray(op, dtype=np.complex128)
        if arr.shape != (k, k):
            raise ShapeError(f"Local operator {subsystem} must be {k}x{k}, got {arr.shape}.")
        condition = float(np.linalg.cond(arr))
        if not np.isfinite(condition) or condition > cond_max:
            raise SingularLocalOperatorError(subsystem, condition)
        local.append(arr)
    full = kron(*local, np.eye(shape.tail_dim))
    transformed = hermitian_part(full @ rho.matrix @ full.conj().T)
    normalized = rho.normalized and math.isclose(
        float(np.trace(transformed).real), 1.0, abs_tol=1e-9
    )
    return DensityMatrix(shape, transformed, normalized=normalized)


def reduced_tail(rho: DensityMatrix) -> ComplexMatrix:
    """Partial trace over every front subsystem."""
    s, n = rho.shape.front_size, rho.shape.tail_dim
    return hermitian_part(np.einsum("anam->nm", rho.matrix.reshape(s, n, s, n)))


def project_subsystem(
    rho: DensityMatrix, subsystem: int, vector: npt.ArrayLike
) -> DensityMatrix:
    """<e|_i rho |e>_i: the unnormalized state left on the other subsystems."""
    shape = rho.shape
    reduced = shape.without_front(subsystem)
    e = np.asarray(vector, dtype=np.complex128).reshape(-1)
    if e.shape != (shape.front_dims[subsystem - 1],):
        raise ShapeError(f"Vector for subsystem {subsystem} has wrong length {e.size}.")
    if not np.any(e):
        raise InvalidValueError(f"Local vector for subsystem {subsystem} is zero.")
    count = len(shape.dims)
    tensor = rho.matrix.reshape(shape.dims * 2)
    pos = subsystem - 1
    tensor = np.tensordot(e.conj(), tensor, axes=([0], [pos]))
    # the ket axis shifted left by one after the first contraction
    tensor = np.tensordot(tensor, e, axes=([count - 1 + pos], [0]))
    return DensityMatrix(reduced, hermitian_part(tensor.reshape(reduced.total_dim, -1)))


def compress_tail(rho: DensityMatrix, basis: npt.ArrayLike) -> DensityMatrix:
    """(I_S x V^dagger) rho (I_S x V) for an isometry V with orthonormal columns."""
    v = np.asarray(basis, dtype=np.complex128)
    if v.ndim != 2 or v.shape[0] != rho.shape.tail_dim:
        raise ShapeError(f"Tail basis must have {rho.shape.tail_dim} rows, got {v.shape}.")
    if v.shape[1] < 1:
        raise ShapeError("Tail basis is empty.")
    full = kron(np.eye(rho.shape.front_size), v)
    compressed = hermitian_part(full.conj().T @ rho.matrix @ full)
    return DensityMatrix(rho.shape.with_tail(v.shape[1]), compressed, normalized=rho.normalized)


def rotation_to_top(vector: npt.ArrayLike) -> ComplexMatrix:
    """Unitary L with L e / |e| = |K-1>, the adjoint of a completion ending in e."""
    e = np.asarray(vector, dtype=np.complex128).reshape(-1)
    norm = float(np.linalg.norm(e))
    if norm == 0.0:
        raise InvalidValueError("Cannot rotate a zero vector.")
    unit = e / norm
    complement = scipy.linalg.null_space(unit.conj()[None, :])
    completion = np.column_stack([complement, unit])
    return completion.conj().T


def _check_local_vectors(
    shape: SystemShape, vectors: Sequence[npt.ArrayLike]
) -> list[np.ndarray]:
    if len(vectors) != shape.num_front:
        raise ShapeError(f"Expected {shape.num_front} local vectors, got {len(vectors)}.")
    local: list[np.ndarray] = []
    for subsystem, (vec, k) in enumerate(zip(vectors, shape.front_dims, strict=True), 1):
        arr = np.asarray(vec, dtype=np.complex128).reshape(-1)
        if arr.shape != (k,):
            raise ShapeError(f"Local vector {subsystem} must have length {k}, got {arr.size}.")
        if not np.any(arr):
            raise InvalidValueError(f"Local vector for subsystem {subsystem} is zero.")
        local.append(arr)
    return local
