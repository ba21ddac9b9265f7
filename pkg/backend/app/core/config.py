"""Configuration settings for the dual automorphism toolkit."""

import logging
from typing import List

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Application settings with validation and defaults."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application Settings
    APP_NAME: str = "DualAut Free Group Toolkit"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = Field(default=False, description="Enable debug logging")
    LOG_LEVEL: str = Field(default="WARNING", description="Root log level for the CLI")

    # Budgets
    ENUMERATION_BUDGET: int = Field(
        default=10_000_000,
        description="Maximum number of word evaluations for a sphere enumeration",
    )
    ITERATION_BUDGET: int = Field(
        default=200_000,
        description="Maximum number of words held in one iterated dual set",
    )

    # Perron-Frobenius Settings
    PF_TOLERANCE: float = Field(default=1e-12, description="Eigenvalue bracket width")
    PF_MAX_ITERATIONS: int = Field(
        default=100_000, description="Iteration cap per irreducible block"
    )

    # Oracle Settings
    ORACLE_OUT_DEPTH: int = Field(default=2, description="Length m of image prefixes")
    ORACLE_PROBE_DEPTH_START: int = Field(
        default=1, description="Smallest sphere depth L0 probed by the oracle"
    )
    ORACLE_SPHERE_DEPTH_CAP: int = Field(
        default=4, description="Cap on the heuristic starting sphere depth"
    )
    ORACLE_MAX_DEPTH: int = Field(
        default=40, description="Deepest extension the oracle may explore"
    )

    # Growth Settings
    GROWTH_KMAX: int = Field(default=8, description="Default number of iterations")
    GROWTH_TOLERANCE: float = Field(
        default=0.15, description="Relative gap allowed between empirical and matrix rate"
    )
    GROWTH_TAIL_WINDOW: int = Field(
        default=3, description="Window length used to approximate the limsup"
    )

    # Randomized checks
    DEFAULT_SEED: int = Field(default=0, description="Seed for randomized suites")

    @field_validator(
        "ENUMERATION_BUDGET",
        "ITERATION_BUDGET",
        "PF_MAX_ITERATIONS",
        "ORACLE_OUT_DEPTH",
        "ORACLE_PROBE_DEPTH_START",
        "ORACLE_SPHERE_DEPTH_CAP",
        "ORACLE_MAX_DEPTH",
        "GROWTH_KMAX",
        "GROWTH_TAIL_WINDOW",
    )
    @classmethod
    def validate_positive_int(cls, v: int) -> int:
        """Budgets and depths must be positive."""
        if v < 1:
            raise ValueError("value must be a positive integer")
        return v

    @field_validator("PF_TOLERANCE", "GROWTH_TOLERANCE")
    @classmethod
    def validate_positive_float(cls, v: float) -> float:
        """Tolerances must be positive."""
        if v <= 0:
            raise ValueError("tolerance must be positive")
        return v

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate the log level name."""
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level: {v}")
        return level


# Create settings instance
settings = Settings()


def validate_budget_settings(current: Settings = settings) -> List[str]:
    """Return the names of budgets set high enough to make runs impractically slow."""
    heavy = []
    if current.ENUMERATION_BUDGET > 10**9:
        heavy.append("ENUMERATION_BUDGET")
    if current.ITERATION_BUDGET > 10**8:
        heavy.append("ITERATION_BUDGET")
    return heavy


def check_settings() -> None:
    """Warn about budgets that will make enumeration-heavy commands crawl."""
    heavy = validate_budget_settings()
    if heavy:
        logger.warning(f"⚠️ Very large budgets configured: {', '.join(heavy)}")


check_settings()
