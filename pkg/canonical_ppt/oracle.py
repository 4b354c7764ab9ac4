"""Independent fixtures and slow reference paths for tests.

Nothing here shares code with the decomposition pipeline: ``brute_reconstruct``
is the reference every reconstruction residual is measured against.
"""

import itertools
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .canonical import assemble_rho, sample_canonical
from .config import Tolerances
from .enums import FixtureKind
from .ensemble import ProductEnsemble, make_term
from .errors import InvalidValueError, ShapeError
from .multilinear import DensityMatrix, SystemShape
from .sampling import complex_gaussian, haar_unitary, haar_vector, make_rng

QUBIT_PAIR = SystemShape(front_dims=(2,), tail_dim=2)

BELL_VARIANTS = ("bell", "psi_minus_mixture", "werner", "classical")


@dataclass(frozen=True)
class FixtureSpec:
    shape: SystemShape
    kind: FixtureKind
    num_terms: int = 1
    rank: int = 1
    mixing: float = 0.5
    variant: str = "bell"
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", FixtureKind(self.kind))
        match self.kind:
            case FixtureKind.RANDOM_SEPARABLE if self.num_terms < 1:
                raise InvalidValueError("random_separable needs num_terms >= 1.")
            case FixtureKind.RANDOM_DENSITY if not 1 <= self.rank <= self.shape.total_dim:
                raise InvalidValueError(f"rank must be in 1..{self.shape.total_dim}.")
            case FixtureKind.BELL_MIXTURE:
                if self.shape != QUBIT_PAIR:
                    raise InvalidValueError("bell_mixture fixtures live on dims [2, 2].")
                if self.variant not in BELL_VARIANTS:
                    raise InvalidValueError(f"Unknown bell_mixture variant {self.variant!r}.")
                if not 0.0 <= self.mixing <= 1.0:
                    raise InvalidValueError("mixing must lie in [0, 1].")


def random_separable(
    shape: SystemShape,
    num_terms: int,
    rng: np.random.Generator,
    *,
    orthonormal_tails: bool = False,
) -> tuple[DensityMatrix, ProductEnsemble]:
    """Convex mix of random product projectors together with its ground truth."""
    if num_terms < 1:
        raise InvalidValueError("num_terms must be at least 1.")
    if orthonormal_tails and num_terms > shape.tail_dim:
        raise InvalidValueError("Orthonormal tails need num_terms <= N.")
    weights = rng.dirichlet(np.ones(num_terms))
    tails = haar_unitary(rng, shape.tail_dim) if orthonormal_tails else None
    terms = []
    for index, weight in enumerate(weights):
        local = [haar_vector(rng, k) for k in shape.front_dims]
        tail = tails[:, index] if tails is not None else haar_vector(rng, shape.tail_dim)
        terms.append(make_term(float(weight), local, tail))
    ensemble = ProductEnsemble(shape=shape, terms=tuple(terms))
    state = DensityMatrix(shape, brute_reconstruct(ensemble, shape), normalized=True)
    return state, ensemble


def random_density(
    shape: SystemShape, target_rank: int, rng: np.random.Generator
) -> DensityMatrix:
    if not 1 <= target_rank <= shape.total_dim:
        raise InvalidValueError(f"target_rank must be in 1..{shape.total_dim}.")
    g = complex_gaussian(rng, (shape.total_dim, target_rank))
    matrix = g @ g.conj().T
    return DensityMatrix(shape, matrix / np.trace(matrix).real, normalized=True)


def brute_reconstruct(ensemble: ProductEnsemble, shape: SystemShape) -> np.ndarray:
    """sum_n p_n |w_n><w_n| with every amplitude of w_n built by index loops."""
    if ensemble.shape != shape:
        raise ShapeError(f"Ensemble shape {ensemble.shape.dims} != {shape.dims}.")
    dims = shape.dims
    result = np.zeros((shape.total_dim, shape.total_dim), dtype=np.complex128)
    for term in ensemble.terms:
        factors = (*term.local_vectors, term.tail_vector)
        w = np.zeros(shape.total_dim, dtype=np.complex128)
        for flat, index in enumerate(itertools.product(*(range(d) for d in dims))):
            amplitude = complex(1.0)
            for factor, i in zip(factors, index, strict=True):
                amplitude *= factor[i]
            w[flat] = amplitude
        result += term.weight * np.outer(w, w.conj())
    return result


def bell_projector() -> DensityMatrix:
    """|Phi+><Phi+| on 2 x 2; its partial transpose has eigenvalue -1/2."""
    phi = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)
    return DensityMatrix(QUBIT_PAIR, np.outer(phi, phi.conj()), normalized=True)


def psi_minus_mixture() -> DensityMatrix:
    """(|psi-><psi-| + |00><00|) / 2, rank 2 and not PPT."""
    matrix = np.array(
        [
            [2, 0, 0, 0],
            [0, 1, -1, 0],
            [0, -1, 1, 0],
            [0, 0, 0, 0],
        ],
        dtype=np.complex128,
    )
    return DensityMatrix(QUBIT_PAIR, matrix / 4, normalized=True)


def werner_state(p: float) -> DensityMatrix:
    """p |psi-><psi-| + (1 - p) I / 4; eigenvalues (1 + 3p)/4 and (1 - p)/4."""
    psi = np.array([0, 1, -1, 0], dtype=np.complex128) / np.sqrt(2)
    matrix = p * np.outer(psi, psi.conj()) + (1 - p) * np.eye(4) / 4
    return DensityMatrix(QUBIT_PAIR, matrix, normalized=True)


def classical_mixture() -> DensityMatrix:
    """(|00><00| + |11><11|) / 2: separable, but no computational product vector works."""
    return DensityMatrix(QUBIT_PAIR, np.diag([0.5, 0, 0, 0.5]).astype(np.complex128), normalized=True)


def _bell_fixture(spec: FixtureSpec, rng: np.random.Generator) -> DensityMatrix:
    match spec.variant:
        case "bell":
            return bell_projector()
        case "psi_minus_mixture":
            return psi_minus_mixture()
        case "werner":
            return werner_state(spec.mixing)
        case _:
            return classical_mixture()


def _separable_fixture(spec: FixtureSpec, rng: np.random.Generator) -> DensityMatrix:
    state, _ = random_separable(spec.shape, spec.num_terms, rng)
    return state


def _density_fixture(spec: FixtureSpec, rng: np.random.Generator) -> DensityMatrix:
    return random_density(spec.shape, spec.rank, rng)


def _canonical_fixture(spec: FixtureSpec, rng: np.random.Generator) -> DensityMatrix:
    return assemble_rho(sample_canonical(spec.shape, rng), Tolerances(), normalize=True)


FixtureBuilder = Callable[[FixtureSpec, np.random.Generator], DensityMatrix]

FIXTURE_BUILDERS: dict[FixtureKind, FixtureBuilder] = {
    FixtureKind.RANDOM_SEPARABLE: _separable_fixture,
    FixtureKind.RANDOM_DENSITY: _density_fixture,
    FixtureKind.BELL_MIXTURE: _bell_fixture,
    FixtureKind.CANONICAL_SAMPLE: _canonical_fixture,
}


def build_fixture(spec: FixtureSpec) -> DensityMatrix:
    builder = FIXTURE_BUILDERS[spec.kind]
    return builder(spec, make_rng(spec.seed))
