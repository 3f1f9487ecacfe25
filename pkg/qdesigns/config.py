from contextlib import contextmanager
from typing import Any, Dict, Iterator

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    # Application
    ENVIRONMENT: str = "production"

    # Parallelism (QDESIGNS_WORKERS)
    WORKERS: int = 1

    # Resource caps
    MAX_ENUMERATION: int = 10_000_000
    MAX_INCIDENCE_BITS: int = 1_000_000_000
    MAX_SUM_TERMS: int = 1_000_000
    MAX_VERIFY_COLUMNS: int = 10_000_000
    MAX_CERTIFICATE_ROWS: int = 1_000_000
    MAX_SEARCH_COLUMNS: int = 10_000
    MAX_SEARCH_CANDIDATES: int = 100_000

    # Fraction of currently available memory an incidence bitmap may claim
    MEMORY_HEADROOM: float = 0.5

    # Search
    GREEDY_RESTARTS: int = 200
    SEARCH_TIMEOUT_SECONDS: float = 120.0

    model_config = SettingsConfigDict(
        env_prefix="QDESIGNS_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )


# Global settings instance
settings = Settings()


@contextmanager
def override_settings(**fields: Any) -> Iterator[Settings]:
    """Temporarily replace settings fields; None values are ignored."""
    previous: Dict[str, Any] = {}
    for name, value in fields.items():
        if value is None:
            continue
        if not hasattr(settings, name):
            raise AttributeError(f"Unknown setting: {name}")
        previous[name] = getattr(settings, name)
        setattr(settings, name, value)
    try:
        yield settings
    finally:
        for name, value in previous.items():
            setattr(settings, name, value)


def get_workers(requested: int = None) -> int:
    """Resolve the worker count from an explicit request or the environment."""
    workers = requested if requested is not None else settings.WORKERS
    return max(1, int(workers))
