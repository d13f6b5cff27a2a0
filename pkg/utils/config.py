"""
Runtime settings, read from CURATOR_* environment variables and .env
"""

import os
from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

VERSION = "0.1.0"

DEFAULT_THRESHOLD = 0.002
DEFAULT_FRAME_GAP = 1
DEFAULT_MIN_SAMPLES = 50
DEFAULT_GRID_STEP = 8


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="CURATOR_", env_file=".env", extra="ignore"
    )

    frame_gap: int = Field(default=DEFAULT_FRAME_GAP, ge=1)
    min_sparse: int = Field(default=DEFAULT_MIN_SAMPLES, ge=1)
    threshold: float = Field(default=DEFAULT_THRESHOLD, ge=0.0)
    grid_step: int = Field(default=DEFAULT_GRID_STEP, ge=1)
    workers: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    depth_kind: Literal["relative", "ground-truth"] = "relative"
    log_level: str = "INFO"


@lru_cache
def get_settings() -> Settings:
    return Settings()
