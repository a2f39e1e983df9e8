"""Application configuration settings"""

import logging
import os
from functools import lru_cache
from typing import Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, Field

ENV_PREFIX = "SCONV_"
LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"
LOG_DATEFMT = "%H:%M:%S"


class Settings(BaseModel):
    app_name: str = "sconv"
    log_level: str = "INFO"

    # Analysis defaults, overridden per run by the config file or CLI flags
    default_tol: float = Field(default=1e-2, gt=0)
    default_checkpoints: Tuple[int, ...] = (64, 128, 256, 512)
    slice_directions: int = Field(default=16, ge=1)
    merge_tol: float = Field(default=1e-12, ge=0)
    stationarity_enumeration_limit: int = Field(default=100_000, ge=1)

    output_dir: str = "runs"

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from SCONV_* environment variables (after loading .env)"""
        load_dotenv()
        values = {}
        for name in cls.model_fields:
            raw = os.environ.get(f"{ENV_PREFIX}{name.upper()}")
            if raw is None:
                continue
            if name == "default_checkpoints":
                values[name] = tuple(int(v) for v in raw.split(",") if v.strip())
            else:
                values[name] = raw
        return cls(**values)


@lru_cache()
def get_settings() -> Settings:
    return Settings.from_env()


def configure_logging(level: str = None) -> None:
    """Install the console log format used across the toolkit"""
    logging.basicConfig(
        level=(level or get_settings().log_level).upper(),
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT,
    )


settings = get_settings()
