import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import replace
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

from .canonical import CanonicalForm, assemble_rho, sample_canonical
from .config import Settings, Tolerances
from .enums import VERDICT_EXIT_CODES, ExitCode, PptMode
from .errors import CanonicalPptError
from .formats import (
    load_certificate,
    load_state,
    write_canonical,
    write_certificate,
    write_state,
)
from .multilinear import DensityMatrix, SystemShape, partial_transpose
from .report import (
    format_certificate_check,
    format_ppt_report,
    format_summary,
    format_verdict,
)
from .sampling import make_rng
from .separability import (
    AnalysisConfig,
    NotPpt,
    Separable,
    analyze,
    check_ppt,
    verify_certificate,
)
from .summary import build_summary

logger = logging.getLogger(__name__)

Command = Callable[[argparse.Namespace, Settings], ExitCode]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(ExitCode.ERROR, f"{self.prog}: error: {message}\n")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = _Parser(
        prog="canonical-ppt",
        description="Certify separability of PPT states of rank N via their canonical form.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    commands = parser.add_subparsers(dest="command", required=True)

    tolerance_flags = _Parser(add_help=False)
    tolerance_flags.add_argument("--tol-psd", type=float, dest="psd_tol")
    tolerance_flags.add_argument("--tol-rank", type=float, dest="rank_rel_tol")
    tolerance_flags.add_argument("--tol-residual", type=float, dest="residual_tol")
    tolerance_flags.add_argument("--tol-simdiag", type=float, dest="simdiag_tol")
    tolerance_flags.add_argument("--cond-max", type=float, dest="cond_max")

    generate = commands.add_parser(
        "generate", parents=[tolerance_flags], help="sample a canonical form and write its state"
    )
    generate.add_argument("--dims", required=True, type=_parse_dims, help="K1,K2,...,N")
    generate.add_argument("--seed", type=int, default=settings.seed)
    generate.add_argument("--cond", type=float, default=settings.condition_target)
    generate.add_argument("--eigenvalue-scale", type=float, default=1.0)
    generate.add_argument("-o", "--output", required=True, type=Path)
    generate.add_argument("--emit-canonical", type=Path)

    check = commands.add_parser("check", parents=[tolerance_flags], help="PPT report")
    check.add_argument("state", type=Path)
    check.add_argument("--all-bipartitions", action="store_true")

    decompose = commands.add_parser(
        "decompose", parents=[tolerance_flags], help="run the separability pipeline"
    )
    decompose.add_argument("state", type=Path)
    decompose.add_argument("-o", "--output", required=True, type=Path)
    decompose.add_argument("--attempts", type=int, default=settings.attempts)
    decompose.add_argument("--seed", type=int, default=settings.seed)
    decompose.add_argument("--tail-compress", action="store_true")
    decompose.add_argument("--all-bipartitions", action="store_true")

    verify = commands.add_parser(
        "verify", parents=[tolerance_flags], help="independently check a certificate"
    )
    verify.add_argument("state", type=Path)
    verify.add_argument("certificate", type=Path)

    inspect = commands.add_parser(
        "inspect", parents=[tolerance_flags], help="shape, rank and spectrum summary"
    )
    inspect.add_argument("state", type=Path)
    return parser


def run_generate(args: argparse.Namespace, settings: Settings) -> ExitCode:
    tolerances = _tolerances(args, settings)
    shape = SystemShape.from_dims(args.dims)
    cf = sample_canonical(
        shape,
        make_rng(args.seed),
        eigenvalue_scale=args.eigenvalue_scale,
        condition_target=args.cond,
    )
    raw = assemble_rho(cf, tolerances)
    scale = 1.0 / raw.trace
    metadata = {
        "generator": "canonical_sample",
        "seed": str(args.seed),
        "condition_target": repr(float(args.cond)),
        "eigenvalue_scale": repr(float(args.eigenvalue_scale)),
        "trace_scale": repr(scale),
    }
    write_state(args.output, raw.normalize(), metadata)
    if args.emit_canonical is not None:
        # F absorbs the normalization: assemble is linear in F
        normalized = CanonicalForm(shape=shape, d_table=cf.d_table, f=cf.f * scale)
        write_canonical(args.emit_canonical, normalized, metadata)
    print(f"wrote {args.output} (dims {','.join(map(str, shape.dims))}, seed {args.seed})")
    return ExitCode.OK


def run_check(args: argparse.Namespace, settings: Settings) -> ExitCode:
    tolerances = _tolerances(args, settings)
    state = load_state(args.state, tolerances)
    report = check_ppt(state, _ppt_mode(args), tolerances)
    print(format_ppt_report(report))
    return ExitCode.OK if report.passed else ExitCode.FAILED


def run_decompose(args: argparse.Namespace, settings: Settings) -> ExitCode:
    tolerances = _tolerances(args, settings)
    state = load_state(args.state, tolerances)
    config = AnalysisConfig(
        tolerances=tolerances,
        attempts=args.attempts,
        ppt_mode=_ppt_mode(args),
        tail_compression=args.tail_compress,
        seed=args.seed,
    )
    verdict = analyze(state, config)
    write_certificate(args.output, verdict, state.shape)
    print(format_verdict(verdict))
    return VERDICT_EXIT_CODES[verdict.kind]


def run_verify(args: argparse.Namespace, settings: Settings) -> ExitCode:
    tolerances = _tolerances(args, settings)
    state = load_state(args.state, tolerances)
    verdict, shape = load_certificate(args.certificate)
    if shape != state.shape:
        print(f"certificate dims {list(shape.dims)} do not match state dims {list(state.shape.dims)}", file=sys.stderr)
        return ExitCode.FAILED
    match verdict:
        case Separable(certificate=cert):
            check = verify_certificate(state, cert, tolerances)
            print(format_certificate_check(check))
            return ExitCode.OK if check.passed else ExitCode.FAILED
        case NotPpt():
            value = _witness_value(state, verdict)
            genuine = value < -tolerances.psd_tol
            print(f"witness {'PASS' if genuine else 'FAIL'}: <w|rho^T|w> = {value:.12g}")
            return ExitCode.OK if genuine else ExitCode.FAILED
        case _:
            print(f"verdict {verdict.kind} carries nothing to verify")
            return ExitCode.FAILED


def run_inspect(args: argparse.Namespace, settings: Settings) -> ExitCode:
    tolerances = _tolerances(args, settings)
    state = load_state(args.state, tolerances)
    print(format_summary(build_summary(state, tolerances)))
    return ExitCode.OK


COMMANDS: dict[str, Command] = {
    "generate": run_generate,
    "check": run_check,
    "decompose": run_decompose,
    "verify": run_verify,
    "inspect": run_inspect,
}


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    try:
        settings = Settings.from_env()
    except (RuntimeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return ExitCode.ERROR

    args = build_parser(settings).parse_args(argv)
    logging.basicConfig(
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        level=_log_level(settings.log_level, args.verbose),
    )

    try:
        return int(COMMANDS[args.command](args, settings))
    except (CanonicalPptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.ERROR
    except Exception:
        logger.exception("Command %s failed", args.command)
        return ExitCode.ERROR


def _tolerances(args: argparse.Namespace, settings: Settings) -> Tolerances:
    names = ("psd_tol", "rank_rel_tol", "residual_tol", "simdiag_tol", "cond_max")
    overrides = {name: getattr(args, name) for name in names if getattr(args, name) is not None}
    return replace(settings.tolerances, **overrides)


def _ppt_mode(args: argparse.Namespace) -> PptMode:
    return PptMode.ALL_BIPARTITIONS if args.all_bipartitions else PptMode.SINGLE_SUBSYSTEMS


def _witness_value(state: DensityMatrix, verdict: NotPpt) -> float:
    w = verdict.witness
    transposed = partial_transpose(state, verdict.subsystems)
    return float(np.real(w.conj() @ transposed @ w) / np.real(w.conj() @ w))


def _parse_dims(raw: str) -> list[int]:
    try:
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid dims {raw!r}") from exc


def _log_level(configured: str, verbose: int) -> int:
    if verbose >= 2:
        return logging.DEBUG
    if verbose == 1:
        return logging.INFO
    return logging.getLevelNamesMapping().get(configured, logging.WARNING)
