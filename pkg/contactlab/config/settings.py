import logging
from pathlib import Path
from typing import Dict

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)

APP_ROOT = Path(__file__).parent.parent


class Settings(BaseSettings):
    """
    Engine settings for contactlab.
    Sampling, tolerance and execution defaults, overridable through
    CONTACTLAB_* environment variables or a .env file.
    """

    # ========= Sampling Configuration =========

    SAMPLE_COUNT: int = Field(
        default=100,
        gt=0,
        description="Number of domain points sampled per run"
    )

    RANDOM_SEED: int = Field(
        default=42,
        description="Seed for point sampling and vector picks"
    )

    EXCLUSION_MARGIN: float = Field(
        default=1e-3,
        gt=0.0,
        description="Minimum |predicate| accepted by the point sampler"
    )

    EXCLUSION_ZERO: float = Field(
        default=1e-12,
        gt=0.0,
        description="|predicate| at or below which frame_at treats a point as excluded"
    )

    DOMAIN_SLACK: float = Field(
        default=1e-3,
        ge=0.0,
        description="Distance outside the domain box still accepted by frame_at"
    )

    MAX_SAMPLING_ATTEMPTS: int = Field(
        default=1000,
        gt=0,
        description="Rejection-sampling attempts allowed per requested point"
    )

    # ========= Tolerance Configuration =========

    STRUCTURAL_TOLERANCE: float = Field(
        default=1e-8,
        gt=0.0,
        description="Identities built from first derivatives only"
    )

    SECOND_ORDER_TOLERANCE: float = Field(
        default=1e-6,
        gt=0.0,
        description="Identities involving h, shape operators or lemma residuals"
    )

    ANGLE_TOLERANCE: float = Field(
        default=1e-7,
        gt=0.0,
        description="Maximum within-point spread of slant angles (radians)"
    )

    CONSTANCY_TOLERANCE: float = Field(
        default=1e-7,
        gt=0.0,
        description="Maximum across-point stddev of the slant function (radians)"
    )

    DEGENERATE_ANGLE_TOLERANCE: float = Field(
        default=1e-6,
        gt=0.0,
        description="sin/cos of the slant angle below which identities are refused"
    )

    RANK_TOLERANCE: float = Field(
        default=1e-10,
        gt=0.0,
        description="Post-projection norm under which Gram-Schmidt drops a vector"
    )

    ARITHMETIC_TOLERANCE: float = Field(
        default=1e-10,
        gt=0.0,
        description="Identities that are exact algebra on already computed residuals"
    )

    SELF_CHECK_TOLERANCE: float = Field(
        default=1e-9,
        gt=0.0,
        description="Ambient constructor self-check threshold"
    )

    XI_ALIGNMENT_TOLERANCE: float = Field(
        default=1e-8,
        gt=0.0,
        description="Threshold for 'X proportional to xi' after normalization"
    )

    # ========= Differentiation Configuration =========

    FD_STEP: float = Field(
        default=1e-5,
        gt=0.0,
        description="Central finite-difference step for slant-function derivatives"
    )

    FD_DISAGREEMENT: float = Field(
        default=1e-4,
        gt=0.0,
        description="Jet vs finite-difference disagreement flagged as non-smooth theta"
    )

    SLANT_SAMPLE_VECTORS: int = Field(
        default=32,
        gt=0,
        description="Random unit vectors per slant-function estimate"
    )

    IDENTITY_PICKS: int = Field(
        default=10,
        gt=0,
        description="Random vector pairs per point for the slant identity residuals"
    )

    # ========= Application Configuration =========

    ENVIRONMENT: str = Field(
        default="development",
        description="Application environment (development, testing, production)"
    )

    LOG_LEVEL: str = Field(
        default="INFO",
        description="Logging level"
    )

    MAX_CONCURRENT_POINTS: int = Field(
        default=4,
        gt=0,
        description="Maximum sample points evaluated concurrently"
    )

    CATALOG_FILE: str = Field(
        default="catalog.json",
        description="Built-in immersion catalog, relative to the application root"
    )

    # ========= Validators =========

    @field_validator('LOG_LEVEL')
    @classmethod
    def validate_log_level(cls, v):
        """Validate logging level name"""
        level = v.strip().upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown log level: {v}")
        return level

    @field_validator('ENVIRONMENT')
    @classmethod
    def validate_environment(cls, v):
        """Validate environment name"""
        env = v.strip().lower()
        if env not in ('development', 'testing', 'production'):
            raise ValueError("ENVIRONMENT must be development, testing or production")
        return env

    @field_validator('CATALOG_FILE')
    @classmethod
    def validate_catalog_file(cls, v):
        """Resolve the catalog path against the application root"""
        path = Path(v)
        if not path.is_absolute():
            path = APP_ROOT / path
        if not path.exists():
            raise ValueError(f"Catalog file not found: {v}")
        return str(path)

    # ========= Configuration Properties =========

    @property
    def is_production(self) -> bool:
        """Check if running in production environment"""
        return self.ENVIRONMENT == 'production'

    def get_tolerances(self) -> Dict[str, float]:
        """Named tolerance classes used by the suites"""
        return {
            "structural": self.STRUCTURAL_TOLERANCE,
            "second_order": self.SECOND_ORDER_TOLERANCE,
            "angle": self.ANGLE_TOLERANCE,
            "constancy": self.CONSTANCY_TOLERANCE,
            "degenerate": self.DEGENERATE_ANGLE_TOLERANCE,
            "rank": self.RANK_TOLERANCE,
            "arithmetic": self.ARITHMETIC_TOLERANCE,
        }

    model_config = SettingsConfigDict(
        env_prefix='CONTACTLAB_',
        env_file='.env',
        env_file_encoding='utf-8',
        case_sensitive=True,
        validate_assignment=True,
        extra='forbid',
    )


# Global settings instance
settings = Settings()

logger.info("✅ contactlab settings loaded")
logger.info(f"   🎲 Samples: {settings.SAMPLE_COUNT} (seed {settings.RANDOM_SEED})")
logger.info(f"   📏 Tolerances: {settings.get_tolerances()}")
logger.info(f"   🏗️ Environment: {settings.ENVIRONMENT}")

__all__ = ['settings', 'Settings', 'APP_ROOT']
