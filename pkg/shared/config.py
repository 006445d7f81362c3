"""
Settings
Environment-driven configuration (SPECSYNTH_* variables, optional .env file)
"""
from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

REPO_ROOT = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    """Runtime settings shared by the CLI, the verifier and the sweep workers"""

    log: str = Field(default="WARNING", description="Log level name (SPECSYNTH_LOG)")
    artifacts_dir: Path = Field(
        default=REPO_ROOT / "artifacts",
        description="Directory holding shipped automata and environment specs"
    )
    max_product_states: int = Field(default=1_000_000, ge=1, description="Explicit product enumeration cap")
    vi_tolerance: float = Field(default=1e-10, gt=0, description="Value-iteration sup-norm stopping tolerance")
    vi_max_sweeps: int = Field(default=1_000_000, ge=1, description="Value-iteration sweep cap")
    curve_stride: int = Field(default=100, ge=1, description="Default learning-curve recording stride")
    worker_id: Optional[str] = Field(default=None, description="Log prefix for sweep workers")

    model_config = SettingsConfigDict(
        env_prefix="SPECSYNTH_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    return Settings()
