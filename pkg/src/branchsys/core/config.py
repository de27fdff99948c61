from functools import lru_cache

from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(case_sensitive=True, env_file=".env", extra="ignore")

    PROJECT_NAME: str = "branchsys"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_FILE: str = ""  # empty: console only

    # Numerical defaults
    DEFAULT_GRID_CELLS: int = 4096
    DEFAULT_TEST_BLOCKS: int = 64
    DEFAULT_SEED: int = 20240611
    DEFAULT_TOLERANCE: float = 1e-9

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def parse_log_level(cls, v):
        """Strip inline comments and normalise the level name."""
        level = str(v).split("#")[0].strip().upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level

    @field_validator("DEFAULT_GRID_CELLS", "DEFAULT_TEST_BLOCKS", mode="before")
    @classmethod
    def validate_positive(cls, v):
        """Grid sizes must be positive integers."""
        try:
            value = int(str(v).split("#")[0].strip())
        except (ValueError, TypeError):
            raise ValueError("Grid sizes must be positive integers")
        if value <= 0:
            raise ValueError("Grid sizes must be positive integers")
        return value


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()
