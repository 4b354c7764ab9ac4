from enum import IntEnum, StrEnum


class VerdictKind(StrEnum):
    SEPARABLE = "SEPARABLE"
    NOT_PPT = "NOT_PPT"
    RANK_CONDITION_UNMET = "RANK_CONDITION_UNMET"
    INCONCLUSIVE = "INCONCLUSIVE"


class PptMode(StrEnum):
    SINGLE_SUBSYSTEMS = "single_subsystems"
    ALL_BIPARTITIONS = "all_bipartitions"


class FixtureKind(StrEnum):
    RANDOM_SEPARABLE = "random_separable"
    RANDOM_DENSITY = "random_density"
    BELL_MIXTURE = "bell_mixture"
    CANONICAL_SAMPLE = "canonical_sample"


class ExitCode(IntEnum):
    OK = 0
    ERROR = 1
    FAILED = 2
    NOT_PPT = 3
    RANK_CONDITION_UNMET = 4
    INCONCLUSIVE = 5


VERDICT_EXIT_CODES = {
    VerdictKind.SEPARABLE: ExitCode.OK,
    VerdictKind.NOT_PPT: ExitCode.NOT_PPT,
    VerdictKind.RANK_CONDITION_UNMET: ExitCode.RANK_CONDITION_UNMET,
    VerdictKind.INCONCLUSIVE: ExitCode.INCONCLUSIVE,
}
