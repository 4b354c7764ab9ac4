"""End-to-end properties over seeded samples of the canonical hypothesis class."""

import numpy as np
import pytest

from canonical_ppt.canonical import assemble_rho, extract, sample_canonical
from canonical_ppt.enums import PptMode, VerdictKind
from canonical_ppt.multilinear import DensityMatrix, SystemShape, kron, partial_transpose
from canonical_ppt.oracle import (
    bell_projector,
    brute_reconstruct,
    classical_mixture,
    psi_minus_mixture,
    werner_state,
)
from canonical_ppt.sampling import haar_unitary
from canonical_ppt.separability import AnalysisConfig, NotPpt, Separable, analyze, check_ppt
from canonical_ppt.utils import relative_residual

SHAPES = (
    *([2, n] for n in range(2, 7)),
    *([2, 2, n] for n in range(2, 6)),
    *([3, 2, n] for n in range(2, 5)),
    *([2, 2, 2, n] for n in range(2, 4)),
)

SAMPLES = [(SHAPES[index % len(SHAPES)], index) for index in range(200)]


def sample_id(sample):
    dims, seed = sample
    return f"{'x'.join(map(str, dims))}-{seed}"


@pytest.mark.parametrize("sample", SAMPLES, ids=sample_id)
def test_generated_states_round_trip_and_certify(sample):
    dims, seed = sample
    shape = SystemShape.from_dims(dims)
    cf = sample_canonical(shape, np.random.default_rng(seed))

    recovered = extract(assemble_rho(cf))
    for key in cf.keys:
        assert relative_residual(recovered.d_table[key], cf.d_table[key]) <= 1e-9
    assert relative_residual(recovered.f, cf.f) <= 1e-9

    rho = assemble_rho(cf, normalize=True)
    report = check_ppt(rho, PptMode.ALL_BIPARTITIONS)
    assert report.passed
    assert report.worst.check.min_eigenvalue >= -1e-10

    verdict = analyze(rho, AnalysisConfig(seed=seed))
    assert isinstance(verdict, Separable), verdict
    cert = verdict.certificate
    assert relative_residual(brute_reconstruct(cert.ensemble, shape), rho.matrix) <= 1e-8
    assert cert.ensemble.total_weight == pytest.approx(rho.trace, abs=1e-8)


@pytest.mark.parametrize("state", [bell_projector(), psi_minus_mixture()], ids=["bell", "psi_minus"])
def test_not_ppt_witness_matches_direct_eigendecomposition(state):
    verdict = analyze(state)
    assert isinstance(verdict, NotPpt)
    direct = np.linalg.eigvalsh(partial_transpose(state, verdict.subsystems))[0]
    assert verdict.eigenvalue == pytest.approx(direct, abs=1e-10)


def test_bell_projector_witness_is_minus_one_half():
    assert analyze(bell_projector()).eigenvalue == pytest.approx(-0.5, abs=1e-12)


def test_werner_state_fails_the_rank_gate():
    assert analyze(werner_state(0.5)).kind is VerdictKind.RANK_CONDITION_UNMET


def test_classical_mixture_certifies_through_a_random_product_vector():
    verdict = analyze(classical_mixture(), AnalysisConfig(attempts=64))
    assert isinstance(verdict, Separable)
    assert np.count_nonzero(np.abs(verdict.certificate.basis_used[0]) > 1e-9) == 2


COVARIANCE_SHAPES = ([2, 3], [3, 3], [2, 2, 2], [3, 2, 3], [2, 2, 2, 2])


@pytest.mark.parametrize("seed", range(50))
def test_verdict_is_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(1000 + seed)
    shape = SystemShape.from_dims(COVARIANCE_SHAPES[seed % len(COVARIANCE_SHAPES)])
    rho = assemble_rho(sample_canonical(shape, rng), normalize=True)
    local = kron(*(haar_unitary(rng, d) for d in shape.dims))
    rotated = DensityMatrix(shape, local @ rho.matrix @ local.conj().T, normalized=True)
    original = analyze(rho, AnalysisConfig(seed=seed))
    moved = analyze(rotated, AnalysisConfig(seed=seed))
    assert original.kind is moved.kind is VerdictKind.SEPARABLE
    assert moved.certificate.reconstruction_residual <= 1e-8
