"""
Application Configuration
"""

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime defaults, overridable through QDOT_* environment variables"""

    # Physics (internal units: nm, eV)
    gamma: float = Field(0.4441, alias="QDOT_GAMMA", gt=0)

    # Eigen / root solvers
    eig_tol: float = Field(1e-10, alias="QDOT_EIG_TOL", gt=0)
    root_tol: float = Field(1e-9, alias="QDOT_ROOT_TOL", gt=0)
    max_outer: int = Field(100, alias="QDOT_MAX_OUTER", gt=0)
    max_inner: int = Field(5000, alias="QDOT_MAX_INNER", gt=0)
    dense_limit: int = Field(400, alias="QDOT_DENSE_LIMIT", ge=0)

    # Optimization driver
    max_iters: int = Field(50, alias="QDOT_MAX_ITERS", gt=0)
    fixed_point_tol: float = Field(1e-10, alias="QDOT_FIXED_POINT_TOL", gt=0)
    dot_resolution: int = Field(2048, alias="QDOT_DOT_RESOLUTION", ge=8)

    # Output
    out_dir: str = Field("out", alias="QDOT_OUT_DIR")
    log_level: str = Field("INFO", alias="QDOT_LOG_LEVEL")
    log_dir: Optional[str] = Field(None, alias="QDOT_LOG_DIR")

    # HTTP server
    host: str = Field("127.0.0.1", alias="QDOT_HOST")
    port: int = Field(8000, alias="QDOT_PORT")

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=False, populate_by_name=True)


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
