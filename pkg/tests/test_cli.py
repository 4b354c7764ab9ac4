import json

import numpy as np
import pytest

from canonical_ppt.app import main
from canonical_ppt.canonical import assemble_rho
from canonical_ppt.enums import ExitCode
from canonical_ppt.formats import load_canonical, load_state, read_state_file, write_state
from canonical_ppt.multilinear import SystemShape
from canonical_ppt.oracle import bell_projector, classical_mixture, random_separable, werner_state


@pytest.fixture
def generated(tmp_path):
    path = tmp_path / "state.json"
    assert main(["generate", "--dims", "2,2,3", "--seed", "3", "-o", str(path)]) == 0
    return path


def test_generate_decompose_verify_pipeline(tmp_path, generated):
    cert = tmp_path / "cert.json"
    assert main(["decompose", str(generated), "-o", str(cert)]) == ExitCode.OK
    assert json.loads(cert.read_text())["verdict"] == "SEPARABLE"
    assert main(["verify", str(generated), str(cert)]) == ExitCode.OK


@pytest.mark.parametrize("seed", ["20", "24"])
def test_ill_conditioned_generated_state_decomposes(tmp_path, seed):
    state = tmp_path / "state.json"
    cert = tmp_path / "cert.json"
    args = ["generate", "--dims", "2,2,2,8", "--seed", seed, "--cond", "1e6"]
    assert main([*args, "-o", str(state)]) == 0
    assert main(["decompose", str(state), "-o", str(cert)]) == ExitCode.OK
    assert main(["verify", str(state), str(cert)]) == ExitCode.OK


def test_generate_writes_normalized_state_with_metadata(generated):
    state_file = read_state_file(generated)
    assert state_file.state.shape.dims == (2, 2, 3)
    assert state_file.state.trace == pytest.approx(1.0)
    assert state_file.metadata["seed"] == "3"
    assert state_file.metadata["condition_target"] == "10.0"
    assert float(state_file.metadata["trace_scale"]) > 0


def test_generate_is_deterministic(tmp_path, generated):
    again = tmp_path / "again.json"
    assert main(["generate", "--dims", "2,2,3", "--seed", "3", "-o", str(again)]) == 0
    assert again.read_bytes() == generated.read_bytes()


def test_generate_emits_matching_canonical_form(tmp_path):
    state_path = tmp_path / "state.json"
    cf_path = tmp_path / "cf.json"
    args = ["generate", "--dims", "3,2,2", "--seed", "8", "--cond", "4"]
    assert main([*args, "-o", str(state_path), "--emit-canonical", str(cf_path)]) == 0
    state = load_state(state_path)
    rebuilt = assemble_rho(load_canonical(cf_path))
    np.testing.assert_allclose(rebuilt.matrix, state.matrix, atol=1e-12)


def test_check_exit_codes(tmp_path, generated, capsys):
    assert main(["check", str(generated), "--all-bipartitions"]) == ExitCode.OK
    assert "PPT (all_bipartitions)" in capsys.readouterr().out
    bell = tmp_path / "bell.json"
    write_state(bell, bell_projector())
    assert main(["check", str(bell)]) == ExitCode.FAILED
    assert "NOT PPT" in capsys.readouterr().out


@pytest.mark.parametrize(
    ("state", "extra", "expected", "verdict"),
    [
        (bell_projector(), [], ExitCode.NOT_PPT, "NOT_PPT"),
        (werner_state(0.5), [], ExitCode.RANK_CONDITION_UNMET, "RANK_CONDITION_UNMET"),
        (classical_mixture(), ["--attempts", "0"], ExitCode.INCONCLUSIVE, "INCONCLUSIVE"),
        (classical_mixture(), [], ExitCode.OK, "SEPARABLE"),
    ],
)
def test_decompose_exit_codes(tmp_path, state, extra, expected, verdict):
    path = tmp_path / "state.json"
    cert = tmp_path / "cert.json"
    write_state(path, state)
    assert main(["decompose", str(path), "-o", str(cert), *extra]) == expected
    assert json.loads(cert.read_text())["verdict"] == verdict


def test_decompose_tail_compression_flag(tmp_path):
    rho, _ = random_separable(SystemShape.from_dims([2, 3]), 2, np.random.default_rng(5), orthonormal_tails=True)
    path = tmp_path / "low_rank.json"
    cert = tmp_path / "cert.json"
    write_state(path, rho)
    assert main(["decompose", str(path), "-o", str(cert)]) == ExitCode.RANK_CONDITION_UNMET
    assert main(["decompose", str(path), "-o", str(cert), "--tail-compress"]) == ExitCode.OK
    assert json.loads(cert.read_text())["tail_compressed"] is True
    assert main(["verify", str(path), str(cert)]) == ExitCode.OK


def test_verify_tampered_certificate_fails(tmp_path, generated, capsys):
    cert = tmp_path / "cert.json"
    assert main(["decompose", str(generated), "-o", str(cert)]) == 0
    payload = json.loads(cert.read_text())
    payload["ensemble"][0]["weight"] *= 1.01
    cert.write_text(json.dumps(payload), encoding="utf-8")
    capsys.readouterr()
    assert main(["verify", str(generated), str(cert)]) == ExitCode.FAILED
    assert "certificate: FAIL" in capsys.readouterr().out


def test_verify_not_ppt_witness(tmp_path):
    path = tmp_path / "bell.json"
    cert = tmp_path / "cert.json"
    write_state(path, bell_projector())
    assert main(["decompose", str(path), "-o", str(cert)]) == ExitCode.NOT_PPT
    assert main(["verify", str(path), str(cert)]) == ExitCode.OK


def test_verify_rank_verdict_has_nothing_to_check(tmp_path):
    path = tmp_path / "werner.json"
    cert = tmp_path / "cert.json"
    write_state(path, werner_state(0.5))
    main(["decompose", str(path), "-o", str(cert)])
    assert main(["verify", str(path), str(cert)]) == ExitCode.FAILED


def test_verify_rejects_certificate_for_other_dims(tmp_path, generated):
    cert = tmp_path / "cert.json"
    assert main(["decompose", str(generated), "-o", str(cert)]) == 0
    other = tmp_path / "bell.json"
    write_state(other, bell_projector())
    assert main(["verify", str(other), str(cert)]) == ExitCode.FAILED


def test_inspect_prints_summary(generated, capsys):
    assert main(["inspect", str(generated)]) == ExitCode.OK
    out = capsys.readouterr().out
    assert "dims: 2 x 2 x 3 (tail N = 3)" in out
    assert "rank: 3\n" in out
    assert "kernel dimension: 9" in out


def test_missing_input_is_an_error(tmp_path):
    assert main(["inspect", str(tmp_path / "missing.json")]) == ExitCode.ERROR


def test_invalid_state_file_is_an_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"format_version": 1, "dims": [2, 2], "matrix": []}))
    assert main(["check", str(path)]) == ExitCode.ERROR


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["generate", "--dims", "2,x", "-o", "out.json"],
        ["decompose", "state.json"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_with_one(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == ExitCode.ERROR


def test_invalid_dims_is_an_error(tmp_path):
    assert main(["generate", "--dims", "1,3", "-o", str(tmp_path / "s.json")]) == ExitCode.ERROR


def test_tolerance_flags_reach_the_pipeline(tmp_path, generated):
    cert = tmp_path / "cert.json"
    assert main(["decompose", str(generated), "-o", str(cert), "--tol-residual", "1e-6"]) == 0
    assert json.loads(cert.read_text())["tolerances"]["residual_tol"] == 1e-6


@pytest.mark.parametrize(
    ("argv", "message"),
    [
        (["generate", "--dims", "2,2", "--tol-psd", "-1"], "must be positive"),
        (["generate", "--dims", "2,2", "--cond", "0.5"], "condition_target"),
    ],
)
def test_invalid_values_print_one_line(tmp_path, capsys, argv, message):
    assert main([*argv, "-o", str(tmp_path / "s.json")]) == ExitCode.ERROR
    err = capsys.readouterr().err
    assert err.startswith("error: ")
    assert message in err
    assert "Traceback" not in err


def test_non_finite_state_prints_one_line(tmp_path, capsys):
    payload = {"format_version": 1, "dims": [2, 2]}
    matrix = [[[0.25 if i == j else 0.0, 0.0] for j in range(4)] for i in range(4)]
    matrix[0][1] = [float("nan"), 0.0]
    payload["matrix"] = matrix
    path = tmp_path / "nan.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    assert main(["check", str(path)]) == ExitCode.ERROR
    err = capsys.readouterr().err
    assert "non-finite" in err
    assert "Traceback" not in err
