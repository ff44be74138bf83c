"""
Runtime configuration
Values come from the environment (prefix GRIDRES_) or a local .env file.
"""
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Make .env values visible to anything that still reads os.environ directly
load_dotenv()


class Settings(BaseSettings):
    """Process-wide defaults. Per-run choices live in the JSON RunConfig."""

    model_config = SettingsConfigDict(
        env_prefix="GRIDRES_",
        env_file=".env",
        extra="ignore",
    )

    log_level: str = Field("INFO", description="Root logging level")
    output_dir: Path = Field(Path("results"), description="Default directory for CSV outputs")
    workers: int = Field(1, ge=1, description="Thread pool size for sweeps (1 = sequential)")
    seed: int = Field(20240101, ge=0, description="Default seed for randomized validation")

    # Root-locus load grid (siemens)
    locus_points: int = Field(60, ge=2)
    locus_min_s: float = Field(1e-4, gt=0)
    locus_max_s: float = Field(1e4, gt=0)

    # Time-domain energization
    sim_dt_s: float = Field(1e-5, gt=0)
    sim_horizon_s: float = Field(0.5, gt=0)
    window_alpha: float = Field(1.0, ge=0, le=1, description="Tukey taper fraction (1.0 = Hann)")


@lru_cache
def get_settings() -> Settings:
    return Settings()
