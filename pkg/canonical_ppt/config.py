import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any

from .errors import InvalidValueError

ENV_PREFIX = "CANONICAL_PPT_"


@dataclass(frozen=True)
class Tolerances:
    psd_tol: float = 1e-9
    rank_rel_tol: float = 1e-9
    residual_tol: float = 1e-8
    cond_max: float = 1e12
    simdiag_tol: float = 1e-9
    simdiag_retries: int = 5

    def __post_init__(self) -> None:
        for item in fields(self):
            value = getattr(self, item.name)
            if not value > 0:
                raise InvalidValueError(f"Tolerance {item.name} must be positive, got {value}.")

    @classmethod
    def from_env(cls) -> "Tolerances":
        defaults = cls()
        return cls(
            psd_tol=_env_float("PSD_TOL", defaults.psd_tol),
            rank_rel_tol=_env_float("RANK_TOL", defaults.rank_rel_tol),
            residual_tol=_env_float("RESIDUAL_TOL", defaults.residual_tol),
            cond_max=_env_float("COND_MAX", defaults.cond_max),
            simdiag_tol=_env_float("SIMDIAG_TOL", defaults.simdiag_tol),
            simdiag_retries=_env_int("SIMDIAG_RETRIES", defaults.simdiag_retries),
        )

    def as_dict(self) -> dict[str, float | int]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Tolerances":
        known = {item.name for item in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidValueError(f"Unknown tolerance fields: {sorted(unknown)}.")
        values: dict[str, Any] = {}
        for name, value in data.items():
            values[name] = int(value) if name == "simdiag_retries" else float(value)
        return cls(**values)


@dataclass(frozen=True)
class Settings:
    tolerances: Tolerances = field(default_factory=Tolerances)
    attempts: int = 64
    seed: int = 0
    condition_target: float = 10.0
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "Settings":
        attempts = _env_int("ATTEMPTS", 64)
        if attempts < 0:
            raise RuntimeError(f"{ENV_PREFIX}ATTEMPTS must be non-negative.")
        condition_target = _env_float("CONDITION_TARGET", 10.0)
        if condition_target < 1.0:
            raise RuntimeError(f"{ENV_PREFIX}CONDITION_TARGET must be at least 1.")
        return cls(
            tolerances=Tolerances.from_env(),
            attempts=attempts,
            seed=_env_int("SEED", 0),
            condition_target=condition_target,
            log_level=os.getenv(f"{ENV_PREFIX}LOG_LEVEL", "WARNING").upper(),
        )


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(ENV_PREFIX + name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise RuntimeError(f"Invalid float for {ENV_PREFIX}{name}: {raw!r}.") from exc


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(ENV_PREFIX + name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise RuntimeError(f"Invalid integer for {ENV_PREFIX}{name}: {raw!r}.") from exc
