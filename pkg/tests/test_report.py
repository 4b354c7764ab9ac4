import pytest

from canonical_ppt.enums import PptMode
from canonical_ppt.oracle import bell_projector, werner_state
from canonical_ppt.report import format_ppt_report, format_summary, format_verdict
from canonical_ppt.separability import Inconclusive, RankConditionUnmet, analyze, check_ppt
from canonical_ppt.summary import build_summary


def test_summary_of_a_canonical_state(make_canonical_state):
    _, rho = make_canonical_state([2, 3], seed=2)
    summary = build_summary(rho)
    assert summary.dims == (2, 3)
    assert summary.rank == 3
    assert summary.kernel_dim == 3
    assert summary.rank_matches_tail
    assert summary.block_ranks[(1,)] == 3
    assert summary.min_eigenvalue == pytest.approx(0.0, abs=1e-10)


def test_summary_flags_rank_mismatch():
    summary = build_summary(werner_state(0.5))
    assert summary.rank == 4
    assert "(differs from N)" in format_summary(summary)


def test_ppt_report_lists_every_pattern():
    text = format_ppt_report(check_ppt(bell_projector(), PptMode.ALL_BIPARTITIONS))
    assert text.startswith("NOT PPT (all_bipartitions)")
    assert "T_1 " in text
    assert "NEGATIVE" in text


def test_format_verdict_headlines_the_kind():
    assert format_verdict(analyze(bell_projector())).startswith("verdict: NOT_PPT")
    assert "rank(rho) = 4, N = 2" in format_verdict(analyze(werner_state(0.5)))
    text = format_verdict(Inconclusive(reason="no basis", residuals={"gap": float("nan")}, attempts=5))
    assert "product vectors tried: 5" in text
    assert "gap: n/a" in text


def test_format_verdict_reports_vectors_tried_before_a_rank_failure():
    text = format_verdict(RankConditionUnmet(rank=1, tail_dim=2, attempts=3))
    assert "rank(rho) = 1, N = 2" in text
    assert "product vectors tried: 3" in text
    assert "product vectors tried" not in format_verdict(RankConditionUnmet(rank=4, tail_dim=2))
