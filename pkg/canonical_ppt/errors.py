"""Exception hierarchy; every error carries the numbers needed to diagnose it."""

from collections.abc import Sequence


class CanonicalPptError(Exception):
    """Base class for all library errors."""


class ShapeError(CanonicalPptError, ValueError):
    pass


class InvalidValueError(CanonicalPptError, ValueError):
    """An argument or matrix entry outside its allowed range."""


class HermiticityError(CanonicalPptError, ValueError):
    def __init__(self, row: int, col: int, asymmetry: float) -> None:
        super().__init__(
            f"Matrix is not Hermitian: |A[{row},{col}] - conj(A[{col},{row}])| = {asymmetry:.3e}."
        )
        self.row = row
        self.col = col
        self.asymmetry = asymmetry


class PsdViolationError(CanonicalPptError, ValueError):
    def __init__(self, eigenvalue: float, witness: Sequence[complex]) -> None:
        super().__init__(f"Matrix is not positive semidefinite: min eigenvalue {eigenvalue:.3e}.")
        self.eigenvalue = eigenvalue
        self.witness = witness


class TraceError(CanonicalPptError, ValueError):
    pass


class SingularLocalOperatorError(CanonicalPptError, ValueError):
    def __init__(self, subsystem: int, condition: float) -> None:
        super().__init__(
            f"Local operator on subsystem {subsystem} is singular or ill-conditioned "
            f"(condition number {condition:.3e})."
        )
        self.subsystem = subsystem
        self.condition = condition


class ConditioningError(CanonicalPptError, ValueError):
    def __init__(self, lambda_min: float, lambda_max: float) -> None:
        super().__init__(
            f"Matrix is rank deficient or ill-conditioned: "
            f"lambda_min={lambda_min:.3e}, lambda_max={lambda_max:.3e}."
        )
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max


class RankConditionError(CanonicalPptError, ValueError):
    def __init__(self, rank: int, block_rank: int, tail_dim: int) -> None:
        super().__init__(
            f"Rank condition unmet: rank(rho)={rank}, rank(top block)={block_rank}, "
            f"N={tail_dim}."
        )
        self.rank = rank
        self.block_rank = block_rank
        self.tail_dim = tail_dim


class CanonicalFormViolation(CanonicalPptError, ValueError):
    def __init__(
        self, worst_block: tuple[tuple[int, ...], tuple[int, ...]], residual: float
    ) -> None:
        super().__init__(
            f"Blocks are inconsistent with the canonical form: worst pair {worst_block} "
            f"has relative residual {residual:.3e}."
        )
        self.worst_block = worst_block
        self.residual = residual


class SimultaneousDiagonalizationError(CanonicalPptError, RuntimeError):
    def __init__(self, best_residual: float, attempts: int) -> None:
        super().__init__(
            f"Simultaneous diagonalization failed after {attempts} attempts "
            f"(best off-diagonal residual {best_residual:.3e})."
        )
        self.best_residual = best_residual
        self.attempts = attempts


class StateFileError(CanonicalPptError, ValueError):
    pass


class MalformedCertificateError(CanonicalPptError, ValueError):
    pass
