from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .errors import InvalidValueError, MalformedCertificateError
from .multilinear import SystemShape, product_vector


@dataclass(frozen=True, eq=False)
class ProductTerm:
    weight: float
    local_vectors: tuple[np.ndarray, ...]
    tail_vector: np.ndarray

    def state_vector(self) -> np.ndarray:
        return product_vector([*self.local_vectors, self.tail_vector])


@dataclass(frozen=True, eq=False)
class ProductEnsemble:
    """Weighted product vectors; stored vectors are unit norm, weights carry the mass."""

    shape: SystemShape
    terms: tuple[ProductTerm, ...]

    @property
    def total_weight(self) -> float:
        return float(sum(term.weight for term in self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def reassemble(self) -> np.ndarray:
        dim = self.shape.total_dim
        result = np.zeros((dim, dim), dtype=np.complex128)
        for term in self.terms:
            w = term.state_vector()
            result += term.weight * np.outer(w, w.conj())
        return result

    def check(self) -> None:
        """Raise on structurally invalid terms: weights or vector lengths."""
        for index, term in enumerate(self.terms):
            if not np.isfinite(term.weight) or term.weight <= 0:
                raise MalformedCertificateError(
                    f"Term {index} has non-positive weight {term.weight!r}."
                )
            if len(term.local_vectors) != self.shape.num_front:
                raise MalformedCertificateError(
                    f"Term {index} has {len(term.local_vectors)} local vectors, "
                    f"expected {self.shape.num_front}."
                )
            lengths = [v.size for v in term.local_vectors] + [term.tail_vector.size]
            if tuple(lengths) != self.shape.dims:
                raise MalformedCertificateError(
                    f"Term {index} has vector lengths {lengths}, expected {list(self.shape.dims)}."
                )

    def max_norm_error(self) -> float:
        worst = 0.0
        for term in self.terms:
            for v in (*term.local_vectors, term.tail_vector):
                worst = max(worst, abs(float(np.linalg.norm(v)) - 1.0))
        return worst


def make_term(
    weight: float,
    local_vectors: Sequence[npt.ArrayLike],
    tail_vector: npt.ArrayLike,
) -> ProductTerm:
    """Normalize every vector and fold the squared norms into the weight."""
    scale = float(weight)
    unit: list[np.ndarray] = []
    for vector in (*local_vectors, tail_vector):
        v = np.asarray(vector, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InvalidValueError("Product term vectors must be nonzero.")
        scale *= norm**2
        unit.append(v / norm)
    return ProductTerm(weight=scale, local_vectors=tuple(unit[:-1]), tail_vector=unit[-1])
