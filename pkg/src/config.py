"""
Configuration management for the Depth Hand Tracker
"""

from pathlib import Path
from typing import Union

from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    # Logging
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    log_format: str = Field(default="text", alias="LOG_FORMAT")

    # Execution
    threads: int = Field(default=1, ge=1, alias="TRACKER_THREADS")

    # Depth camera intrinsics (640 x 480 sensor)
    depth_fx: float = Field(default=571.4, gt=0, alias="DEPTH_FX")
    depth_fy: float = Field(default=571.4, gt=0, alias="DEPTH_FY")
    depth_cx: float = Field(default=319.5, alias="DEPTH_CX")
    depth_cy: float = Field(default=239.5, alias="DEPTH_CY")

    # Foreground segmentation
    background_threshold_m: float = Field(default=2.4, gt=0, le=10.0, alias="BACKGROUND_THRESHOLD_M")

    # Task configuration files
    regions_path: str = Field(default="configs/regions.json", alias="REGIONS_PATH")
    step_ordering_path: str = Field(default="configs/step_ordering.json", alias="STEP_ORDERING_PATH")

    class Config:
        env_file = ".env"
        case_sensitive = False
        extra = "ignore"


# Global settings instance
settings = Settings()


PROJECT_ROOT = Path(__file__).resolve().parent.parent


def resolve_config_path(path: Union[str, Path]) -> Path:
    """Resolve a config path against the working directory, then the project root"""
    candidate = Path(path)
    if candidate.is_absolute() or candidate.exists():
        return candidate
    return PROJECT_ROOT / candidate
