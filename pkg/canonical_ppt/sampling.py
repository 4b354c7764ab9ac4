"""Seeded random primitives. Every function takes an explicit Generator."""

import numpy as np


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def complex_gaussian(rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
    """Standard complex normal samples, E|z|^2 = 1."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(complex_gaussian(rng, (dim, dim)))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def haar_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Uniform on the unit sphere of C^dim."""
    v = complex_gaussian(rng, dim)
    return v / np.linalg.norm(v)


def log_uniform_spectrum(
    rng: np.random.Generator, dim: int, condition_target: float
) -> np.ndarray:
    """Positive values in [1, condition_target], endpoints included when dim > 1."""
    if dim == 1:
        return np.ones(1)
    inner = rng.uniform(0.0, np.log(condition_target), size=dim - 2)
    logs = np.concatenate([[0.0, np.log(condition_target)], inner])
    return np.exp(rng.permutation(logs))
