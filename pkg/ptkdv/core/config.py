import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, List, Tuple

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings with environment variable support."""

    # Application Info
    app_name: str = "ptkdv"
    app_version: str = "0.1.0"

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Optional[str] = Field(default=None, description="Log file path")

    # Outputs
    output_root: Path = Field(default=Path("runs"), description="Root directory for command outputs")

    # Series evaluation
    series_rel_tol: float = Field(default=1e-12, description="Relative truncation tolerance for series")
    series_max_terms: int = Field(default=100_000, description="Term cap per series index")
    series_guard: float = Field(default=0.95, description="Radius beyond which series give way to transformations or quadrature")

    # Curves
    curve_samples: int = Field(default=2001, description="Samples per emitted curve")
    curve_vmax: float = Field(default=10.0, description="Truncation of infinite v-ranges")
    real_tol_abs: float = Field(default=1e-8, description="Absolute realness tolerance")
    real_tol_rel: float = Field(default=1e-8, description="Relative realness tolerance")

    # Evolution
    singular_clamp: float = Field(default=1e-8, description="Clamp threshold for |u_x| when clamping is enabled")
    blowup_threshold: float = Field(default=1e12, description="Abort when any |u| exceeds this value")

    # Concurrency
    max_workers: Optional[int] = Field(default=None, validate_default=True, description="Worker threads for sweeps (None for auto)")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="PTKDV_",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("output_root", mode="before")
    @classmethod
    def validate_output_root(cls, v):
        """Ensure output directory exists."""
        path = Path(v)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @field_validator("series_guard")
    @classmethod
    def validate_series_guard(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("series_guard must lie in (0, 1)")
        return v

    @field_validator("max_workers", mode="before")
    @classmethod
    def validate_max_workers(cls, v):
        """Use the system CPU count if None."""
        if v is None:
            return os.cpu_count() or 1
        return v


# Global settings instance
settings = Settings()


@dataclass(frozen=True)
class FigureBranchSet:
    """One parameter set of a figure preset."""
    epsilon: float
    branches: Tuple[int, ...]
    k: str  # complex literal, see utils.helpers.parse_complex
    m: float
    v_range: Tuple[float, float]
    real_range: Tuple[float, float]  # stated range of realness

    def to_dict(self) -> dict:
        return {
            'epsilon': self.epsilon,
            'branches': list(self.branches),
            'k': self.k,
            'm': self.m,
            'v_range': list(self.v_range),
            'real_range': list(self.real_range),
        }


def get_figure_preset(name: str) -> List[FigureBranchSet]:
    """Get the parameter sets reproducing one figure."""
    vmax = settings.curve_vmax
    presets = {
        # cnoidal analogues; small m keeps the finite real ranges close to
        # [-1/2k^2, 0] and [0, 1/2k^2]
        "fig1": [
            FigureBranchSet(3.0, (2, 4), "1/sqrt2", 0.05, (-1.0, 0.0), (-1.0, 0.0)),
            FigureBranchSet(3.0, (2, 4), "i/sqrt2", 0.05, (-vmax, 0.0), (-vmax, 0.0)),
            FigureBranchSet(5.0, (2, 5), "i/sqrt2", 0.05, (0.0, 1.0), (0.0, 1.0)),
            FigureBranchSet(5.0, (2, 5), "1/sqrt2", 0.05, (0.0, vmax), (0.0, vmax)),
        ],
        # tan^2 analogues, m = 0, k = 1/sqrt2
        "fig2": [
            FigureBranchSet(1.0, (0, 1), "1/sqrt2", 0.0, (0.0, vmax), (0.0, vmax)),
            FigureBranchSet(3.0, (2, 4), "1/sqrt2", 0.0, (-1.0, 0.0), (-1.0, 0.0)),
            FigureBranchSet(5.0, (2, 5), "1/sqrt2", 0.0, (0.0, vmax), (0.0, vmax)),
            FigureBranchSet(11.0, (4, 10), "1/sqrt2", 0.0, (-1.0, 0.0), (-1.0, 0.0)),
        ],
        # one-soliton analogues, m = 1
        "fig3": [
            FigureBranchSet(1.0, (0, 1), "1/sqrt2", 1.0, (-1.0, -1e-3), (-1.0, 0.0)),
            FigureBranchSet(5.0, (2, 5), "1/sqrt2", 1.0, (-1.0, vmax), (0.0, vmax)),
            FigureBranchSet(3.0, (2, 4), "i/sqrt2", 1.0, (-vmax, 1.0), (-vmax, 1.0)),
            FigureBranchSet(11.0, (4, 10), "i/sqrt2", 1.0, (-vmax, 1.0), (-vmax, 1.0)),
        ],
    }

    if name not in presets:
        raise KeyError(f"Unknown figure preset: {name}")
    return presets[name]


def list_figure_presets() -> List[str]:
    return ["fig1", "fig2", "fig3"]


def get_system_info() -> dict:
    """Host information recorded in run manifests."""
    import platform

    import psutil

    return {
        "ram_gb": psutil.virtual_memory().total // (1024 ** 3),
        "cpu_count": os.cpu_count(),
        "platform": platform.system(),
        "architecture": platform.machine(),
        "python": platform.python_version(),
    }
