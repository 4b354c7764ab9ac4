from .separability import (
    AnalysisVerdict,
    CertificateCheck,
    Inconclusive,
    NotPpt,
    PptReport,
    RankConditionUnmet,
    Separable,
)
from .summary import StateSummary
from .utils import format_float


def format_subsystems(subsystems: tuple[int, ...]) -> str:
    return "T_" + ",".join(str(s) for s in subsystems)


def format_ppt_report(report: PptReport) -> str:
    status = "PPT" if report.passed else "NOT PPT"
    lines = [f"{status} ({report.mode})"]
    for entry in report.entries:
        mark = "ok" if entry.check.is_psd else "NEGATIVE"
        lines.append(
            f"  {format_subsystems(entry.subsystems):<12} "
            f"min eigenvalue {entry.check.min_eigenvalue: .6e}  {mark}"
        )
    return "\n".join(lines)


def format_verdict(verdict: AnalysisVerdict) -> str:
    lines = [f"verdict: {verdict.kind}"]
    match verdict:
        case Separable(certificate=cert):
            lines.append(f"  terms: {len(cert.ensemble)}")
            lines.append(f"  total weight: {cert.ensemble.total_weight:.12g}")
            lines.append(f"  trace: {cert.trace:.12g}")
            lines.append(f"  reconstruction residual: {format_float(cert.reconstruction_residual)}")
            lines.append(f"  block residual: {format_float(cert.diagnostics.block_residual)}")
            lines.append(f"  min joint gap: {format_float(cert.diagnostics.min_joint_gap)}")
            if cert.tail_compressed:
                lines.append("  tail compressed to the support of the tail marginal")
        case NotPpt():
            lines.append(f"  transpose: {format_subsystems(verdict.subsystems)}")
            lines.append(f"  witness eigenvalue: {verdict.eigenvalue:.12g}")
        case RankConditionUnmet():
            lines.append(f"  rank(rho) = {verdict.rank}, N = {verdict.tail_dim}")
            if verdict.attempts:
                lines.append(f"  product vectors tried: {verdict.attempts}")
        case Inconclusive():
            lines.append(f"  reason: {verdict.reason}")
            if verdict.attempts:
                lines.append(f"  product vectors tried: {verdict.attempts}")
            for name, value in sorted(verdict.residuals.items()):
                lines.append(f"  {name}: {format_float(value)}")
    return "\n".join(lines)


def format_certificate_check(check: CertificateCheck) -> str:
    status = "PASS" if check.passed else "FAIL"
    return "\n".join(
        [
            f"certificate: {status}",
            f"  reconstruction residual: {format_float(check.residual)}",
            f"  weight vs trace: {format_float(check.weight_residual)}",
            f"  unit-norm error: {format_float(check.norm_error)}",
        ]
    )


def format_summary(summary: StateSummary) -> str:
    dims = " x ".join(str(d) for d in summary.dims)
    lines = [
        f"dims: {dims} (tail N = {summary.tail_dim})",
        f"trace: {summary.trace:.12g}",
        f"rank: {summary.rank}" + ("" if summary.rank_matches_tail else " (differs from N)"),
        f"kernel dimension: {summary.kernel_dim}",
        f"eigenvalues: min {summary.min_eigenvalue: .6e}, max {summary.max_eigenvalue: .6e}",
        "leading eigenvalues: " + ", ".join(f"{x:.6g}" for x in summary.top_eigenvalues),
        "diagonal block ranks:",
    ]
    for index, block_rank in summary.block_ranks.items():
        label = ",".join(str(i) for i in index)
        lines.append(f"  <{label}|rho|{label}>: {block_rank}")
    return "\n".join(lines)
