import os
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseSettings, validator


class Settings(BaseSettings):
    """Application settings."""

    LOG_LEVEL: str = "INFO"

    # Model caps
    MAX_PARTICLES: int = 12
    DENSE_MATRIX_CAP: int = 8
    PERMUTATION_CAP: int = 9

    # Contour moments
    SERIES_REL_TOL: float = 1e-15
    QUADRATURE_RADIUS: float = 0.5
    QUADRATURE_NODES: int = 2048
    IMAGINARY_TOL: float = 1e-9

    # Determinants above this condition number are redone in mpmath arithmetic
    HIGH_PRECISION_CONDITION: float = 1e4
    HIGH_PRECISION_DIGITS: int = 40
    MAX_PRECISION_DIGITS: int = 640

    # Master-equation oracle and Monte Carlo
    ORACLE_TOL: float = 1e-10
    ORACLE_MAX_STATES: int = 2_000_000
    MC_BLOCK_SIZE: int = 4096
    WORKER_THREADS: Optional[int] = None  # None means os.cpu_count()

    # Identity suite
    IDENTITY_THRESHOLD: float = 1e-10
    IDENTITY_TRIALS: int = 100
    MIN_SEPARATION: float = 1e-3

    class Config:
        env_file = ".env"
        case_sensitive = True

    @validator("LOG_LEVEL")
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return level

    @validator("QUADRATURE_RADIUS")
    def _radius_inside_unit_disk(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError("QUADRATURE_RADIUS must lie in (0, 1)")
        return value

    @validator("MAX_PARTICLES", "DENSE_MATRIX_CAP", "PERMUTATION_CAP", "QUADRATURE_NODES",
               "ORACLE_MAX_STATES", "MC_BLOCK_SIZE", "IDENTITY_TRIALS", "HIGH_PRECISION_DIGITS",
               "MAX_PRECISION_DIGITS")
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be positive")
        return value

    @validator("HIGH_PRECISION_CONDITION")
    def _condition_above_one(cls, value: float) -> float:
        if not value >= 1.0:
            raise ValueError("HIGH_PRECISION_CONDITION must be at least 1")
        return value

    @validator("MAX_PRECISION_DIGITS")
    def _ceiling_above_start(cls, value: int, values: dict) -> int:
        start = values.get("HIGH_PRECISION_DIGITS")
        if start is not None and value < start:
            raise ValueError("MAX_PRECISION_DIGITS must be at least HIGH_PRECISION_DIGITS")
        return value

    def worker_count(self) -> int:
        """Number of worker threads for grid and replica fan-out."""
        if self.WORKER_THREADS is not None:
            return max(1, self.WORKER_THREADS)
        return os.cpu_count() or 1


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings."""
    return Settings()


def load_settings(env_file: Optional[str] = None) -> Settings:
    """
    Apply an env-format config file on top of the process environment and rebuild the cached settings.

    Values in the file win over variables already set; CLI flags are applied later by the caller.
    """
    if env_file is not None:
        if not os.path.isfile(env_file):
            raise FileNotFoundError(f"config file {env_file} not found")
        load_dotenv(env_file, override=True)
        get_settings.cache_clear()
    return get_settings()
