import math

import numpy as np
import numpy.typing as npt


def frobenius(matrix: npt.ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(matrix), ord="fro"))


def relative_residual(actual: npt.ArrayLike, reference: npt.ArrayLike) -> float:
    """Frobenius distance scaled by the reference norm; absolute when the reference is zero."""
    diff = frobenius(np.asarray(actual) - np.asarray(reference))
    scale = frobenius(reference)
    if scale == 0.0:
        return diff
    return diff / scale


def hermitian_part(matrix: npt.ArrayLike) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.complex128)
    return 0.5 * (arr + arr.conj().T)


def format_float(value: float | None) -> str:
    if value is None or not math.isfinite(value):
        return "n/a"
    return f"{value:.3e}"
