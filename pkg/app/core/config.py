"""
Configuration management for the PPT witness lab.
Loads settings from environment variables (prefix ``PPTLAB_``) and ``.env``.
"""
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache
from pathlib import Path
from typing import Optional
from dotenv import load_dotenv
import logging

# Load .env file explicitly before anything else
load_dotenv(override=True)

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="PPTLAB_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Noise emulation defaults (calibrated to land near 0.95 state fidelity)
    noise_p: float = Field(default=0.05, ge=0.0, le=1.0)
    angle_jitter_sigma: float = Field(default=0.02, ge=0.0)
    seed: int = 2019

    # Monte Carlo / statistics
    monte_carlo_repetitions: int = Field(default=30, ge=30)
    verdict_sigma_k: float = Field(default=2.0, gt=0.0)
    default_shots: Optional[int] = Field(default=None, ge=1)

    # Numerical tolerances
    ppt_tolerance: float = Field(default=1e-10, ge=0.0)
    verdict_tolerance: float = Field(default=1e-9, ge=0.0)

    # Output
    output_dir: str = "./data/results/"
    log_level: str = "INFO"

    # Server Configuration
    host: str = "0.0.0.0"
    port: int = 8000


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


def ensure_directories():
    """Create the result directory if it doesn't exist."""
    settings = get_settings()
    Path(settings.output_dir).mkdir(parents=True, exist_ok=True)
    logger.debug(f"Output directory ready: {settings.output_dir}")
