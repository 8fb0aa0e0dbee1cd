"""
Configuration - Runtime settings and numerical tolerances
Settings are read from FLM_* environment variables (or a .env file)
"""

from functools import lru_cache
from typing import Final, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

# ============= NUMERICAL TOLERANCES =============

METRIC_TOL: Final = 1e-9      # metric / three-hop checks
ZERO_TOL: Final = 1e-9        # LP round-off treated as zero
FEAS_TOL: Final = 1e-7        # constraint feasibility
SEP_TOL: Final = 1e-7         # separation threshold
OBJ_REL_TOL: Final = 1e-6     # objective comparisons
GAMMA_DROP: Final = 1e-12     # decomposition coefficients dropped below this
LEMMA_TOL: Final = 1e-6       # runtime lemma checks

MIN_LAMBDA: Final = 1.678


class Settings(BaseSettings):
    """
    Application settings

    Every field can be overridden with an FLM_<NAME> environment variable.
    """
    model_config = SettingsConfigDict(env_prefix="FLM_", env_file=".env", extra="ignore")

    log_level: str = "INFO"
    log_file: Optional[str] = None
    database_url: Optional[str] = None

    exhaustive_separation_cap: int = 22
    exhaustive_check_cap: int = 14
    oracle_facility_cap: int = 16
    brute_force_vertex_cap: int = 12
    max_cut_rounds: int = 1000

    check_lemmas: bool = True
    jobs: int = 1


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()


def reload_settings() -> Settings:
    """Drop the cached settings and re-read the environment"""
    get_settings.cache_clear()
    return get_settings()
