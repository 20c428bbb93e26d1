import io
import math
from functools import lru_cache
from pathlib import Path
from typing import Annotated, Any, Literal, Mapping

from dotenv import dotenv_values
from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, NoDecode, SettingsConfigDict

from coutile.exceptions import ConfigurationError
from coutile.models.enums import (
    ComputationKindName,
    CryptoBackend,
    Mode,
    PunishmentRule,
)


def parse_comma_separated(value: Any) -> Any:
    """
    Split a comma-separated string into a list of stripped, non-empty items.

    Lists pass through untouched so the same validator serves programmatic
    construction, config files and environment variables.

    Example:
        >>> parse_comma_separated("yes, no,blank")
        ['yes', 'no', 'blank']
    """
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class Settings(BaseSettings):
    """Process-level knobs for logging and telemetry, read from the environment."""

    LOG_LEVEL: str = "INFO"
    ENVIRONMENT: Literal["development", "staging", "production"] = "development"
    OTEL_SERVICE_NAME: str = "coutile"

    model_config = SettingsConfigDict(
        env_file_encoding="utf-8", env_file=".env", extra="ignore"
    )


@lru_cache()
# get_settings.cache_clear() is needed by tests that modify env vars
def get_settings() -> Settings:
    """
    Load process settings from environment variables and the optional .env file.

    Returns:
        Settings: cached instance; repeated calls return the same object.
    """
    return Settings()


class SimConfig(BaseSettings):
    """
    Full parameterization of one simulation run.

    Defaults reproduce the reference experiment: 100 peers, 10 clients per
    joint computation, 3 workers, 250 iterations, δ=0.002, 20% malicious peers.
    Every field can be set from the environment with the ``COUTILE_`` prefix.
    """

    peers: int = 100
    clients: int = 10
    redundancy: int = 3
    iterations: int = 250
    delta: float = 0.002
    p_forward: float = 0.67
    managers: int = 3
    kappa_min: int = 60
    kappa_max: int = 99
    epsilon: float = 1e-6
    max_iter: int = 1000
    malicious_frac: float = 0.2
    mode: Mode = Mode.RATIONAL
    opinion_prior: float = 2.0
    punishment: PunishmentRule = PunishmentRule.RESET
    band_below: float = 0.75
    band_above: float = 0.25
    publish_output: bool = False
    seed: int = 1
    output_dir: Path = Path("results")

    # Extensions, all neutral by default
    computation: ComputationKindName = ComputationKindName.RANK
    tally_options: Annotated[list[str], NoDecode] = Field(
        default_factory=lambda: ["yes", "no", "blank"]
    )
    crypto_backend: CryptoBackend = CryptoBackend.CURVE
    block_size: int = 256
    max_hops: int = 64
    distributed_reputation: bool = False
    non_rewarding_frac: float = 0.0
    malicious_forwarding: bool = False
    malicious_managers: bool = False
    trace: bool = False

    model_config = SettingsConfigDict(env_prefix="COUTILE_", extra="ignore")

    @field_validator("tally_options", mode="before")
    @classmethod
    def split_options(cls, value: Any) -> Any:
        return parse_comma_separated(value)

    @model_validator(mode="after")
    def check_constraints(self) -> "SimConfig":
        """
        Enforce the cross-field invariants of a run.

        Raises:
            ConfigurationError: naming the first violated constraint and its field.
        """
        checks: list[tuple[bool, str, str]] = [
            (self.clients >= 4, "clients", "clients (m) must be ≥ 4"),
            (self.peers >= self.clients, "peers", "peers (n) must be ≥ clients (m)"),
            (self.redundancy >= 1, "redundancy", "redundancy (r) must be ≥ 1"),
            (
                self.kappa_max > self.redundancy,
                "kappa_max",
                "kappa_max must be > redundancy (r)",
            ),
            (
                self.kappa_min > self.redundancy,
                "kappa_min",
                "kappa_min must be > redundancy (r)",
            ),
            (
                self.peers - 1 > self.redundancy,
                "peers",
                "peers (n) must exceed redundancy (r) + 1",
            ),
            (self.iterations >= 0, "iterations", "iterations (T) must be ≥ 0"),
            (self.delta >= 0, "delta", "delta (δ) must be ≥ 0"),
            (
                self.opinion_prior >= 0,
                "opinion_prior",
                "opinion_prior must be ≥ 0",
            ),
            (
                self.band_below >= 0 and self.band_above >= 0,
                "band_below" if self.band_below < 0 else "band_above",
                "worker candidate band widths must be ≥ 0",
            ),
            (0 <= self.p_forward <= 1, "p_forward", "p_forward (p) must be in [0, 1]"),
            (self.managers >= 0, "managers", "managers (M) must be ≥ 0"),
            (
                self.managers < self.peers,
                "managers",
                "managers (M) must be < peers (n)",
            ),
            (self.epsilon > 0, "epsilon", "epsilon (ε) must be > 0"),
            (self.max_iter >= 1, "max_iter", "max_iter must be ≥ 1"),
            (
                0 <= self.malicious_frac <= 1,
                "malicious_frac",
                "malicious_frac must be in [0, 1]",
            ),
            (
                0 <= self.non_rewarding_frac <= 1,
                "non_rewarding_frac",
                "non_rewarding_frac must be in [0, 1]",
            ),
            (self.block_size >= 64, "block_size", "block_size must be ≥ 64"),
            (self.max_hops >= 1, "max_hops", "max_hops must be ≥ 1"),
            (
                len(self.tally_options) >= 1
                and len(set(self.tally_options)) == len(self.tally_options),
                "tally_options",
                "tally_options must be a non-empty list of distinct options",
            ),
            (
                not self.publish_output
                or self.computation is ComputationKindName.TALLY,
                "publish_output",
                "publish_output requires computation=tally",
            ),
        ]
        for ok, field, message in checks:
            if not ok:
                raise ConfigurationError(message, field)
        return self

    @property
    def malicious_count(self) -> int:
        """Number of malicious peers, ⌊malicious_frac · n⌋."""
        return math.floor(self.malicious_frac * self.peers + 1e-9)

    @property
    def non_rewarding_count(self) -> int:
        return math.floor(self.non_rewarding_frac * self.peers + 1e-9)


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(str(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def dump_config(config: SimConfig) -> str:
    """
    Serialize a configuration as flat ``key=value`` lines in field order.

    The output is a valid config file: ``parse_config(config_text=dump_config(c))``
    reproduces ``c``.
    """
    lines = [
        f"{name}={_format_value(getattr(config, name))}"
        for name in SimConfig.model_fields
    ]
    return "\n".join(lines) + "\n"


def read_config_file(
    config_file: Path | None = None, config_text: str | None = None
) -> dict[str, str]:
    """
    Read flat key=value configuration from a file or an in-memory string.

    Dashes in keys are accepted as underscores so file keys may mirror the
    command-line flags (``p-forward`` or ``p_forward``).

    Raises:
        ConfigurationError: if the file is missing or names an unknown key.
    """
    if config_file is not None:
        if not config_file.is_file():
            raise ConfigurationError(
                f"Config file '{config_file}' not found", "config"
            )
        raw = dotenv_values(config_file)
    elif config_text is not None:
        raw = dotenv_values(stream=io.StringIO(config_text))
    else:
        return {}

    values: dict[str, str] = {}
    for key, value in raw.items():
        name = key.strip().replace("-", "_")
        if name not in SimConfig.model_fields:
            raise ConfigurationError(f"Unknown configuration key '{key}'", key)
        if value is not None:
            values[name] = value
    return values


def parse_config(
    overrides: Mapping[str, Any] | None = None,
    config_file: Path | None = None,
    config_text: str | None = None,
) -> SimConfig:
    """
    Build a SimConfig with precedence flags > config file > environment > defaults.

    Parameters:
        overrides: values taken from command-line flags; ``None`` entries are ignored.
        config_file: optional flat key=value file.
        config_text: optional key=value text, used instead of a file.

    Returns:
        SimConfig: the validated configuration.

    Raises:
        ConfigurationError: on unknown keys, unparsable values or violated constraints.
    """
    values: dict[str, Any] = read_config_file(config_file, config_text)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    try:
        return SimConfig(**values)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or None
        raise ConfigurationError(f"{field}: {error['msg']}", field) from exc
