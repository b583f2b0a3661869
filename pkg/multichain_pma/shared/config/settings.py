"""Centralized settings management with environment variables."""

from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Centralized numerical and output settings loaded from environment variables.

    Every field can be overridden with an ``MCPMA_``-prefixed environment
    variable or a ``.env`` file, e.g. ``MCPMA_PROB_TOL=1e-10``.
    """

    model_config = SettingsConfigDict(
        env_prefix="MCPMA_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Tolerances
    prob_tol: float = Field(1e-12, description="Row-sum / floor tolerance for probabilities")
    identity_tol: float = Field(1e-10, description="Tolerance for Cesaro and visitation identities")
    bellman_tol: float = Field(1e-9, description="Tolerance for Bellman residuals")
    pivot_tol: float = Field(1e-12, description="Smallest admissible LU pivot magnitude")

    # Oracles
    fd_step: float = Field(1e-5, description="Central finite-difference step")

    # Chain constants
    exact_cover_max: int = Field(12, description="Largest class size for exact cover times")
    mc_budget: int = Field(2000, description="Monte Carlo episodes for estimated cover times")

    # Mirror ascent
    vertex_enum_max: int = Field(4096, description="Largest |A|^|S| for vertex enumeration")
    max_step_size: float = Field(1e8, description="Cap applied to every mirror step size")
    log_every: int = Field(1, ge=1, description="Iterates between per-iteration debug lines")

    # Reproducibility
    default_seed: int = Field(0, description="Seed used when none is supplied")

    # Output settings
    output_dir: str = Field("output", description="Directory for run artifacts")
    log_level: str = Field("INFO", description="Log level for the console sink")
    log_file: Optional[str] = Field(None, description="Optional log file path")
    show_progress: bool = Field(False, description="Show tqdm progress bars in long loops")

    def ensure_output_dir(self, output_dir: Optional[str] = None) -> Path:
        """Create the output directory if it doesn't exist.

        Args:
            output_dir: Directory to create (defaults to ``self.output_dir``)

        Returns:
            Path to the directory
        """
        path = Path(output_dir or self.output_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path


# Global settings instance
settings = Settings()
