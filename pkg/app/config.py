"""Process settings for the pFedGame simulator."""

from functools import lru_cache

from pydantic import AliasChoices, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Environment-based settings; experiment parameters live in SimConfig."""

    app_name: str = Field(default="pFedGame Simulator", description="Application name")
    app_version: str = Field(default="0.1.0", description="Application version")
    environment: str = Field(default="development", description="Environment (development, test, production)")
    log_level: str = Field(
        default="INFO",
        validation_alias=AliasChoices("PFEDGAME_LOG", "PFEDGAME_LOG_LEVEL"),
        description="Logging level",
    )
    workers: int = Field(
        default=1,
        validation_alias=AliasChoices("PFEDGAME_WORKERS", "workers"),
        description="Threads used for per-node work inside a round",
    )
    output_root: str = Field(
        default="out",
        validation_alias=AliasChoices("PFEDGAME_OUTPUT_ROOT", "output_root"),
        description="Parent directory for default run outputs",
    )

    @field_validator("environment")
    @classmethod
    def validate_environment(cls, v: str) -> str:
        """Validate environment value."""
        valid_environments = ["development", "test", "production"]
        if v not in valid_environments:
            raise ValueError(f"Environment must be one of: {valid_environments}")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level value."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of: {valid_levels}")
        return v.upper()

    @field_validator("workers")
    @classmethod
    def validate_workers(cls, v: int) -> int:
        """Validate worker count."""
        if v < 1:
            raise ValueError("Workers must be at least 1")
        return v

    model_config = SettingsConfigDict(
        env_file=".env.local",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached application settings."""
    return Settings()


def validate_configuration() -> bool:
    """Check that settings load; problems are logged rather than raised."""
    from app.utils.logging import StructuredLogger

    logger = StructuredLogger("config")
    try:
        settings = get_settings()
    except Exception as e:
        logger.error(f"❌ Configuration validation failed: {e}")
        return False

    logger.debug(
        "✅ Configuration validation passed",
        environment=settings.environment,
        log_level=settings.log_level,
        workers=settings.workers,
    )
    return True
