from dataclasses import dataclass

import numpy as np

from .config import Tolerances
from .multilinear import DensityMatrix, FrontMultiIndex, block
from .numerics import hermitian_eig, rank


@dataclass(frozen=True)
class StateSummary:
    dims: tuple[int, ...]
    trace: float
    rank: int
    kernel_dim: int
    min_eigenvalue: float
    max_eigenvalue: float
    top_eigenvalues: tuple[float, ...]
    block_ranks: dict[FrontMultiIndex, int]

    @property
    def tail_dim(self) -> int:
        return self.dims[-1]

    @property
    def rank_matches_tail(self) -> bool:
        return self.rank == self.tail_dim


def build_summary(
    rho: DensityMatrix, tolerances: Tolerances | None = None, top: int = 8
) -> StateSummary:
    tolerances = tolerances or Tolerances()
    eigenvalues = hermitian_eig(rho.matrix).eigenvalues
    rho_rank = rank(rho.matrix, tolerances.rank_rel_tol)
    block_ranks = {
        b: rank(block(rho, b, b), tolerances.rank_rel_tol) for b in rho.shape.front_indices()
    }
    descending = np.sort(eigenvalues)[::-1]
    return StateSummary(
        dims=rho.shape.dims,
        trace=rho.trace,
        rank=rho_rank,
        kernel_dim=rho.dim - rho_rank,
        min_eigenvalue=float(eigenvalues[0]),
        max_eigenvalue=float(eigenvalues[-1]),
        top_eigenvalues=tuple(float(x) for x in descending[:top]),
        block_ranks=block_ranks,
    )
