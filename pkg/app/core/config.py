"""Runtime configuration."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Engine settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    precision_start_bits: int = Field(default=64, alias="HELLY_PRECISION_START_BITS", ge=8)
    precision_cap_bits: int = Field(default=4096, alias="HELLY_PRECISION_CAP_BITS", ge=8)
    oracle_budget: int = Field(default=20, alias="HELLY_ORACLE_BUDGET", ge=1)
    rainbow_cap: int = Field(default=1_000_000, alias="HELLY_RAINBOW_CAP", ge=1)
    workers: int = Field(default=1, alias="HELLY_WORKERS", ge=1)
    planted_fraction: float = Field(default=0.5, alias="HELLY_PLANTED_FRACTION", ge=0.0, le=1.0)
    ramsey_overrides: dict[int, int] = Field(default_factory=dict, alias="HELLY_RAMSEY_OVERRIDES")
    render_scale: float = Field(default=40.0, alias="HELLY_RENDER_SCALE", gt=0.0)
    output_directory: Path = Field(default=Path("./out"), alias="HELLY_OUTPUT_DIRECTORY")
    log_level: str = Field(default="WARNING", alias="HELLY_LOG_LEVEL")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return cached settings instance."""

    return Settings()
