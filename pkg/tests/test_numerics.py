import numpy as np
import pytest

from canonical_ppt.config import Tolerances
from canonical_ppt.errors import (
    ConditioningError,
    ShapeError,
    SimultaneousDiagonalizationError,
)
from canonical_ppt.multilinear import partial_transpose
from canonical_ppt.numerics import (
    ROUNDING_SLACK,
    commutation_residual,
    condition_number,
    conditioned_tolerances,
    hermitian_eig,
    is_psd,
    kernel_basis,
    psd_sqrt_invsqrt,
    rank,
    simultaneous_diagonalize,
)
from canonical_ppt.oracle import bell_projector
from canonical_ppt.sampling import complex_gaussian, haar_unitary

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def low_rank_psd(rng, dim, target_rank):
    a = complex_gaussian(rng, (dim, target_rank))
    return a @ a.conj().T


def off_diagonal(matrix):
    return matrix - np.diag(np.diagonal(matrix))


def test_hermitian_eig_of_diagonal():
    spectrum = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(spectrum.eigenvalues, [1, 2, 3])
    np.testing.assert_allclose(np.abs(spectrum.eigenvectors), np.eye(3)[:, [1, 2, 0]])


def test_hermitian_eig_of_sigma_x():
    spectrum = hermitian_eig(SIGMA_X)
    np.testing.assert_allclose(spectrum.eigenvalues, [-1, 1])
    first = spectrum.eigenvectors[:, 0]
    np.testing.assert_allclose(abs(np.vdot(first, np.array([1, -1]) / np.sqrt(2))), 1.0)


@pytest.mark.parametrize("seed", range(20))
def test_hermitian_eig_reconstructs(seed):
    rng = np.random.default_rng(seed)
    g = complex_gaussian(rng, (6, 6))
    h = g + g.conj().T
    spectrum = hermitian_eig(h)
    residual = np.linalg.norm(spectrum.reconstruct() - h) / np.linalg.norm(h)
    assert residual <= 1e-10


def test_hermitian_eig_rejects_non_square():
    with pytest.raises(ShapeError):
        hermitian_eig(np.ones((2, 3)))


def test_is_psd_identity():
    check = is_psd(np.eye(3))
    assert check.is_psd
    assert check.min_eigenvalue == pytest.approx(1.0)


def test_is_psd_small_negative_eigenvalue():
    check = is_psd(np.diag([1.0, -1e-3]), tol=1e-9)
    assert not check.is_psd
    assert check.min_eigenvalue == pytest.approx(-1e-3)
    np.testing.assert_allclose(np.abs(check.witness), [0, 1])


def test_is_psd_bell_partial_transpose():
    check = is_psd(partial_transpose(bell_projector(), 1))
    assert not check.is_psd
    assert check.min_eigenvalue == pytest.approx(-0.5, abs=1e-12)


def test_rank_thresholds_relative_to_largest_singular_value():
    assert rank(np.diag([1.0, 1e-13, 0.0]), 1e-9) == 1
    assert rank(np.zeros((3, 3))) == 0


@pytest.mark.parametrize("seed", range(100))
def test_rank_and_kernel_agree_on_constructed_fixtures(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 8))
    target = int(rng.integers(1, dim + 1))
    m = low_rank_psd(rng, dim, target)
    assert rank(m) == target
    kernel = kernel_basis(m)
    assert kernel.shape == (dim, dim - target)
    if kernel.size:
        assert np.linalg.norm(m @ kernel) <= 1e-10 * np.linalg.norm(m)
        np.testing.assert_allclose(kernel.conj().T @ kernel, np.eye(dim - target), atol=1e-12)


def test_kernel_basis_examples():
    kernel = kernel_basis(np.diag([1.0, 0.0]))
    assert kernel.shape == (2, 1)
    np.testing.assert_allclose(np.abs(kernel[:, 0]), [0, 1])
    assert kernel_basis(np.eye(3)).shape == (3, 0)


def test_psd_sqrt_invsqrt_of_diagonal():
    sqrt, inv_sqrt = psd_sqrt_invsqrt(np.diag([1.0, 4.0]))
    np.testing.assert_allclose(sqrt, np.diag([1, 2]), atol=1e-15)
    np.testing.assert_allclose(inv_sqrt, np.diag([1, 0.5]), atol=1e-15)
    sqrt, inv_sqrt = psd_sqrt_invsqrt(np.eye(3))
    np.testing.assert_allclose(sqrt, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(inv_sqrt, np.eye(3), atol=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_psd_sqrt_squares_back(seed):
    rng = np.random.default_rng(seed)
    f = low_rank_psd(rng, 5, 5) + np.eye(5)
    sqrt, inv_sqrt = psd_sqrt_invsqrt(f)
    assert np.linalg.norm(sqrt @ sqrt - f) / np.linalg.norm(f) <= 1e-10
    np.testing.assert_allclose(sqrt @ inv_sqrt, np.eye(5), atol=1e-10)


def test_psd_sqrt_rejects_singular_matrix():
    with pytest.raises(ConditioningError) as info:
        psd_sqrt_invsqrt(np.diag([1.0, 0.0]))
    assert info.value.lambda_max == pytest.approx(1.0)


def test_psd_sqrt_rejects_ill_conditioned_matrix():
    with pytest.raises(ConditioningError):
        psd_sqrt_invsqrt(np.diag([1.0, 1e-6]), Tolerances(cond_max=1e3))


def test_commutation_residual_examples(rng):
    assert commutation_residual([np.diag([1, 2j]), np.diag([3, -1])]) <= 1e-15
    assert commutation_residual([SIGMA_X, SIGMA_Z]) >= 1.0
    u = haar_unitary(rng, 4)
    family = [(u * complex_gaussian(rng, 4)) @ u.conj().T for _ in range(3)]
    assert commutation_residual(family) <= 1e-12


def test_commutation_residual_is_scale_invariant():
    reference = commutation_residual([SIGMA_X, SIGMA_Z])
    assert commutation_residual([1e-6 * SIGMA_X, SIGMA_Z]) == pytest.approx(reference)
    assert commutation_residual([1e6 * SIGMA_X, SIGMA_Z]) == pytest.approx(reference)
    assert commutation_residual([np.zeros((2, 2)), SIGMA_Z]) == 0.0


def test_condition_number():
    assert condition_number(np.diag([1.0, 4.0])) == pytest.approx(4.0)
    assert condition_number(np.diag([0.0, 1.0])) == np.inf


def test_conditioned_tolerances_raise_only_the_simdiag_floor():
    base = Tolerances()
    assert conditioned_tolerances(base, 10.0, 4) is base
    raised = conditioned_tolerances(base, 1e8, 8)
    assert raised.simdiag_tol == pytest.approx(ROUNDING_SLACK * np.finfo(float).eps * 1e8 * 8)
    assert raised.residual_tol == base.residual_tol
    assert raised.psd_tol == base.psd_tol
    assert raised.simdiag_retries == base.simdiag_retries


def test_family_read_through_ill_conditioned_f_passes_conditioned_checks(rng):
    n = 6
    u = haar_unitary(rng, n)
    family = [(u * complex_gaussian(rng, n)) @ u.conj().T for _ in range(3)]
    v = haar_unitary(rng, n)
    f = (v * np.geomspace(1.0, 1e7, n)) @ v.conj().T
    sqrt_f, inv_sqrt_f = psd_sqrt_invsqrt(f)
    noisy = [inv_sqrt_f @ (sqrt_f @ d @ sqrt_f) @ inv_sqrt_f for d in family]
    tolerances = conditioned_tolerances(Tolerances(), condition_number(f), n)
    assert commutation_residual(noisy) <= tolerances.simdiag_tol
    joint = simultaneous_diagonalize(noisy, tolerances, rng)
    assert joint.residual <= tolerances.simdiag_tol


def test_simultaneous_diagonalize_diagonal_family(rng):
    family = [np.diag([1.0, 2.0, 3.0]), np.diag([4.0, 4.0, 5.0])]
    joint = simultaneous_diagonalize(family, rng=rng)
    np.testing.assert_allclose(np.abs(joint.basis) ** 2 @ np.ones(3), np.ones(3))
    for d, values in zip(family, joint.eigenvalues, strict=True):
        np.testing.assert_allclose(joint.basis.conj().T @ d @ joint.basis, np.diag(values), atol=1e-12)
    assert sorted(joint.eigenvalues[0].real) == pytest.approx([1, 2, 3])


def test_simultaneous_diagonalize_shared_eigenvectors(rng):
    joint = simultaneous_diagonalize([SIGMA_X, 2 * SIGMA_X], rng=rng)
    pairs = sorted(tuple(np.round(joint.eigenvalues[:, n].real, 12)) for n in range(2))
    assert pairs == [(-1.0, -2.0), (1.0, 2.0)]
    for n in range(2):
        column = joint.basis[:, n]
        assert abs(abs(column[0]) - 1 / np.sqrt(2)) <= 1e-12
        assert abs(abs(column[1]) - 1 / np.sqrt(2)) <= 1e-12


def test_simultaneous_diagonalize_normal_non_hermitian_family(rng):
    u = haar_unitary(rng, 5)
    family = [(u * complex_gaussian(rng, 5)) @ u.conj().T for _ in range(4)]
    joint = simultaneous_diagonalize(family, rng=rng)
    for d in family:
        rotated = joint.basis.conj().T @ d @ joint.basis
        assert np.max(np.abs(off_diagonal(rotated))) <= 1e-9 * np.linalg.norm(d)
    assert joint.min_gap > 0


def test_simultaneous_diagonalize_single_matrix_matches_its_spectrum(rng):
    u = haar_unitary(rng, 5)
    values = complex_gaussian(rng, 5)
    joint = simultaneous_diagonalize([(u * values) @ u.conj().T], rng=rng)
    np.testing.assert_allclose(np.sort_complex(joint.eigenvalues[0]), np.sort_complex(values), atol=1e-10)


def test_joint_eigenvalues_are_invariant_under_unitary_conjugation(rng):
    u = haar_unitary(rng, 4)
    family = [(u * complex_gaussian(rng, 4)) @ u.conj().T for _ in range(3)]
    w = haar_unitary(rng, 4)
    moved = [w @ d @ w.conj().T for d in family]
    before = simultaneous_diagonalize(family, rng=rng).eigenvalues
    after = simultaneous_diagonalize(moved, rng=rng).eigenvalues
    for n in range(4):
        distances = np.max(np.abs(after - before[:, [n]]), axis=0)
        assert distances.min() <= 1e-10


@pytest.mark.parametrize("seed", range(100))
def test_simultaneous_diagonalize_degenerate_spectra(seed):
    rng = np.random.default_rng(seed)
    u = haar_unitary(rng, 4)
    spectra = [
        np.array([1.0, 1.0, 2.0, 2.0]),
        np.array([3j, 5.0, 3j, 5.0]),
        complex_gaussian(rng, 4),
    ]
    family = [(u * values) @ u.conj().T for values in spectra]
    joint = simultaneous_diagonalize(family, rng=rng)
    assert joint.residual <= 1e-9


def test_simultaneous_diagonalize_degenerate_joint_eigenspace(rng):
    u = haar_unitary(rng, 3)
    family = [(u * values) @ u.conj().T for values in ([1.0, 1.0, 2.0], [3.0, 3.0, -1.0])]
    joint = simultaneous_diagonalize(family, rng=rng)
    assert joint.residual <= 1e-9
    assert joint.min_gap == pytest.approx(0.0, abs=1e-9)


def test_simultaneous_diagonalize_single_dimension(rng):
    joint = simultaneous_diagonalize([np.array([[2 + 1j]])], rng=rng)
    assert joint.min_gap == np.inf
    np.testing.assert_allclose(joint.eigenvalues, [[2 + 1j]])


def test_simultaneous_diagonalize_fails_on_non_commuting_family(rng):
    with pytest.raises(SimultaneousDiagonalizationError) as info:
        simultaneous_diagonalize([SIGMA_X, SIGMA_Z], Tolerances(simdiag_retries=2), rng)
    assert info.value.attempts == 2
    assert info.value.best_residual > 1e-3


def test_simultaneous_diagonalize_rejects_mismatched_family():
    with pytest.raises(ShapeError):
        simultaneous_diagonalize([np.eye(2), np.eye(3)])
