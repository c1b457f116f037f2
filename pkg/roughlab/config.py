from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """App settings loaded from environment (ROUGHLAB_*) / .env file."""

    # ── Monte Carlo ─────────────────────────────────────────────────────────
    # ROUGHLAB_SEED overrides the default seed of every sampling run.
    seed: int = Field(20240601)
    mc_samples: int = Field(10_000, ge=1)
    mc_sigma: int = Field(3, ge=1)

    # ── Analysis horizons ───────────────────────────────────────────────────
    # Every n up to this bound must fall in exactly one piece of a sequence.
    coverage_horizon: int = Field(10_000, ge=1)
    # Indices checked pointwise against the symbolic exceedance functions.
    pointwise_horizon: int = Field(1_000, ge=1)
    # Upper bound for doubling searches on monotone terms.
    search_cap: int = Field(2**40, ge=2)

    # ── Ideals ──────────────────────────────────────────────────────────────
    exh_depth: int = Field(64, ge=1)
    exh_rungs: int = Field(8, ge=2)

    # Atoms kept when an infinite geometric law is represented finitely.
    geometric_truncation: int = Field(24, ge=3)

    # ── App ─────────────────────────────────────────────────────────────────
    log_level: str = Field("INFO")
    json_logs: bool = Field(False)
    # Maximum request body accepted by the HTTP surface (bytes). Default 256 KB.
    max_payload_bytes: int = Field(262_144)

    model_config = SettingsConfigDict(
        env_prefix="ROUGHLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
