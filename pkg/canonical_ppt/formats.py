"""JSON file formats for states, canonical forms, certificates and fixture specs.

Complex numbers are stored as [re, im] pairs. Output is canonical: sorted
keys, two-space indent, shortest round-trip floats, so write -> read -> write
is byte-identical. Writes go to a temporary file that is renamed into place.
"""

import json
import logging
import math
import os
import tempfile
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from .canonical import CanonicalForm, ValidationReport
from .config import Tolerances
from .ensemble import ProductEnsemble, ProductTerm
from .enums import FixtureKind, VerdictKind
from .errors import MalformedCertificateError, ShapeError, StateFileError
from .multilinear import DensityMatrix, SystemShape
from .oracle import FixtureSpec
from .separability import (
    AnalysisVerdict,
    Inconclusive,
    NotPpt,
    RankConditionUnmet,
    SeparabilityCertificate,
    Separable,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class StateFile:
    state: DensityMatrix
    metadata: dict[str, str] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION


def encode_vector(vector: npt.ArrayLike) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vector, dtype=np.complex128).reshape(-1)]


def encode_matrix(matrix: npt.ArrayLike) -> list[list[list[float]]]:
    return [encode_vector(row) for row in np.asarray(matrix, dtype=np.complex128)]


def decode_vector(data: Any) -> np.ndarray:
    try:
        pairs = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValueError("Complex entries must be [re, im] number pairs.") from exc
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("Complex vectors must be lists of [re, im] pairs.")
    return pairs[:, 0] + 1j * pairs[:, 1]


def decode_matrix(data: Any) -> np.ndarray:
    try:
        pairs = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValueError("Matrix must be a rectangular grid of [re, im] pairs.") from exc
    if pairs.ndim != 3 or pairs.shape[2] != 2:
        raise ValueError("Matrix must be a rectangular grid of [re, im] pairs.")
    return pairs[..., 0] + 1j * pairs[..., 1]


def dumps(payload: Mapping[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path, payload: Mapping[str, Any]) -> None:
    text = dumps(payload)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    logger.info("Wrote %s", path)


def read_json(path: Path) -> dict[str, Any]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise StateFileError(f"Cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise StateFileError(f"{path} must contain a JSON object.")
    return data


def state_to_dict(state: DensityMatrix, metadata: Mapping[str, str] | None = None) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "dims": list(state.shape.dims),
        "matrix": encode_matrix(state.matrix),
        "metadata": dict(metadata or {}),
    }


def state_from_dict(data: Mapping[str, Any], tolerances: Tolerances | None = None) -> StateFile:
    tolerances = tolerances or Tolerances()
    version = _format_version(data)
    shape = _shape(data)
    try:
        matrix = decode_matrix(data.get("matrix"))
    except ValueError as exc:
        raise StateFileError(str(exc)) from exc
    side = shape.total_dim
    if matrix.shape != (side, side):
        raise StateFileError(
            f"Matrix is {matrix.shape[0]}x{matrix.shape[1]} but dims {list(shape.dims)} "
            f"require {side}x{side}."
        )
    metadata = data.get("metadata", {})
    if not isinstance(metadata, dict) or not all(isinstance(v, str) for v in metadata.values()):
        raise StateFileError("metadata must map strings to strings.")
    normalized = math.isclose(float(np.trace(matrix).real), 1.0, abs_tol=tolerances.psd_tol)
    state = DensityMatrix.from_array(shape, matrix, normalized=normalized, tolerances=tolerances)
    return StateFile(state=state, metadata=dict(metadata), format_version=version)


def write_state(path: Path, state: DensityMatrix, metadata: Mapping[str, str] | None = None) -> None:
    write_json(path, state_to_dict(state, metadata))


def read_state_file(path: Path, tolerances: Tolerances | None = None) -> StateFile:
    return state_from_dict(read_json(path), tolerances)


def load_state(path: Path, tolerances: Tolerances | None = None) -> DensityMatrix:
    return read_state_file(path, tolerances).state


def canonical_to_dict(cf: CanonicalForm, metadata: Mapping[str, str] | None = None) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "dims": list(cf.shape.dims),
        "d_table": [
            {"subsystem": i, "level": j, "matrix": encode_matrix(cf.d_table[(i, j)])}
            for i, j in cf.keys
        ],
        "f": encode_matrix(cf.f),
        "metadata": dict(metadata or {}),
    }


def canonical_from_dict(data: Mapping[str, Any]) -> CanonicalForm:
    _format_version(data)
    shape = _shape(data)
    try:
        table = {
            (int(entry["subsystem"]), int(entry["level"])): decode_matrix(entry["matrix"])
            for entry in data["d_table"]
        }
        return CanonicalForm(shape=shape, d_table=table, f=decode_matrix(data["f"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise StateFileError(f"Malformed canonical form: {exc}") from exc


def write_canonical(path: Path, cf: CanonicalForm, metadata: Mapping[str, str] | None = None) -> None:
    write_json(path, canonical_to_dict(cf, metadata))


def load_canonical(path: Path) -> CanonicalForm:
    return canonical_from_dict(read_json(path))


def verdict_to_dict(verdict: AnalysisVerdict, shape: SystemShape) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "verdict": str(verdict.kind),
        "dims": list(shape.dims),
    }
    match verdict:
        case Separable(certificate=cert):
            payload.update(
                ensemble=[_term_to_dict(term) for term in cert.ensemble.terms],
                reconstruction_residual=cert.reconstruction_residual,
                basis_used=[encode_vector(v) for v in cert.basis_used],
                diagnostics=_finite_values(cert.diagnostics.as_dict()),
                tolerances=cert.tolerances.as_dict(),
                trace=cert.trace,
                tail_compressed=cert.tail_compressed,
            )
        case NotPpt():
            payload.update(
                subsystems=list(verdict.subsystems),
                witness_eigenvalue=verdict.eigenvalue,
                witness_vector=encode_vector(verdict.witness),
            )
        case RankConditionUnmet():
            payload.update(
                reason="rank(rho) differs from the tail dimension N",
                diagnostics={"rank": verdict.rank, "tail_dim": verdict.tail_dim},
                attempts=verdict.attempts,
            )
        case Inconclusive():
            payload.update(
                reason=verdict.reason,
                diagnostics=_finite_values(verdict.residuals),
                attempts=verdict.attempts,
            )
    return payload


def verdict_from_dict(data: Mapping[str, Any]) -> tuple[AnalysisVerdict, SystemShape]:
    _format_version(data)
    shape = _shape(data)
    try:
        kind = VerdictKind(data["verdict"])
        match kind:
            case VerdictKind.SEPARABLE:
                verdict: AnalysisVerdict = Separable(certificate=_certificate(data, shape))
            case VerdictKind.NOT_PPT:
                verdict = NotPpt(
                    subsystems=tuple(int(x) for x in data["subsystems"]),
                    eigenvalue=float(data["witness_eigenvalue"]),
                    witness=decode_vector(data["witness_vector"]),
                )
            case VerdictKind.RANK_CONDITION_UNMET:
                diagnostics = data["diagnostics"]
                verdict = RankConditionUnmet(
                    rank=int(diagnostics["rank"]),
                    tail_dim=int(diagnostics["tail_dim"]),
                    attempts=int(data["attempts"]),
                )
            case VerdictKind.INCONCLUSIVE:
                verdict = Inconclusive(
                    reason=str(data["reason"]),
                    residuals={
                        k: math.nan if v is None else float(v)
                        for k, v in data["diagnostics"].items()
                    },
                    attempts=int(data["attempts"]),
                )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MalformedCertificateError):
            raise
        raise MalformedCertificateError(f"Malformed certificate: {exc}") from exc
    return verdict, shape


def write_certificate(path: Path, verdict: AnalysisVerdict, shape: SystemShape) -> None:
    write_json(path, verdict_to_dict(verdict, shape))


def load_certificate(path: Path) -> tuple[AnalysisVerdict, SystemShape]:
    return verdict_from_dict(read_json(path))


def fixture_spec_from_dict(data: Mapping[str, Any]) -> FixtureSpec:
    shape = _shape(data)
    try:
        return FixtureSpec(
            shape=shape,
            kind=FixtureKind(data["kind"]),
            num_terms=int(data.get("num_terms", 1)),
            rank=int(data.get("rank", 1)),
            mixing=float(data.get("mixing", 0.5)),
            variant=str(data.get("variant", "bell")),
            seed=int(data.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StateFileError(f"Malformed fixture spec: {exc}") from exc


def load_fixture_specs(path: Path) -> list[FixtureSpec]:
    """A file holds either one spec object or {"fixtures": [spec, ...]}."""
    data = read_json(path)
    entries: Sequence[Mapping[str, Any]] = data.get("fixtures", [data])
    return [fixture_spec_from_dict(entry) for entry in entries]


def _certificate(data: Mapping[str, Any], shape: SystemShape) -> SeparabilityCertificate:
    terms = tuple(_term_from_dict(entry) for entry in data["ensemble"])
    ensemble = ProductEnsemble(shape=shape, terms=terms)
    ensemble.check()
    return SeparabilityCertificate(
        ensemble=ensemble,
        reconstruction_residual=float(data["reconstruction_residual"]),
        basis_used=tuple(decode_vector(v) for v in data["basis_used"]),
        diagnostics=ValidationReport.from_dict(data["diagnostics"]),
        tolerances=Tolerances.from_dict(data["tolerances"]),
        trace=float(data["trace"]),
        tail_compressed=bool(data.get("tail_compressed", False)),
    )


def _term_to_dict(term: ProductTerm) -> dict[str, Any]:
    return {
        "weight": term.weight,
        "local_vectors": [encode_vector(v) for v in term.local_vectors],
        "tail_vector": encode_vector(term.tail_vector),
    }


def _term_from_dict(data: Mapping[str, Any]) -> ProductTerm:
    return ProductTerm(
        weight=float(data["weight"]),
        local_vectors=tuple(decode_vector(v) for v in data["local_vectors"]),
        tail_vector=decode_vector(data["tail_vector"]),
    )


def _finite_values(values: Mapping[str, Any]) -> dict[str, Any]:
    return {
        key: None if isinstance(value, float) and not math.isfinite(value) else value
        for key, value in values.items()
    }


def _format_version(data: Mapping[str, Any]) -> int:
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise StateFileError(f"Unsupported format_version {version!r}, expected {FORMAT_VERSION}.")
    return int(version)


def _shape(data: Mapping[str, Any]) -> SystemShape:
    dims = data.get("dims")
    if not isinstance(dims, list) or not all(isinstance(d, int) for d in dims):
        raise StateFileError("dims must be a list of integers with the tail dimension last.")
    try:
        return SystemShape.from_dims(dims)
    except ShapeError as exc:
        raise StateFileError(str(exc)) from exc
