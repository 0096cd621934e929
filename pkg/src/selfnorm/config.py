"""
Runtime configuration.

Values come from the environment (optionally seeded from a .env file) and can
be overridden by CLI flags. Hard caps that guard against runaway input are
module constants, not settings.
"""

import os
from dataclasses import dataclass, replace
from typing import Optional

from dotenv import load_dotenv

from .errors import ConfigError


# Hard caps
CLOSURE_CAP = 100_000
TABLE_LIMIT = 4096
ASSOCIATIVITY_EXHAUSTIVE_LIMIT = 256
ASSOCIATIVITY_SAMPLES = 2000
MERSENNE_SCAN_MAX = 13
CERTIFIED_ISO_LIMIT = 200

# Defaults for the tunable settings
DEFAULT_BUDGET = 2000
DEFAULT_MAX_JOINS = 1_000_000
DEFAULT_PARALLEL = 1
DEFAULT_SEED = 0


@dataclass(frozen=True)
class Settings:
    """
    Tunable knobs shared by the deciders and the CLI.

    Attributes:
        budget: largest group order for which the exact subgroup lattice is built
        max_joins: candidate joins allowed before the lattice is declared truncated
        parallel: worker count for lattice joins and per-subgroup checks
        seed: seed for randomised spot checks and action sampling
        slow_iso: certify fingerprint matches with an explicit isomorphism search
    """

    budget: int = DEFAULT_BUDGET
    max_joins: int = DEFAULT_MAX_JOINS
    parallel: int = DEFAULT_PARALLEL
    seed: int = DEFAULT_SEED
    slow_iso: bool = False

    def with_overrides(self, **overrides) -> "Settings":
        """Return a copy with every non-None override applied."""
        values = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **values)


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def load_settings(env_file: Optional[str] = None) -> Settings:
    """
    Load settings from the environment.

    Args:
        env_file: optional path of a .env file (default: search from cwd)

    Returns:
        Settings populated from SELFNORM_* variables

    Raises:
        ConfigError: when a variable is present but invalid
    """
    load_dotenv(env_file)
    return Settings(
        budget=_int_env("SELFNORM_BUDGET", DEFAULT_BUDGET),
        max_joins=_int_env("SELFNORM_MAX_JOINS", DEFAULT_MAX_JOINS),
        parallel=_int_env("SELFNORM_PARALLEL", DEFAULT_PARALLEL),
        seed=_int_env("SELFNORM_SEED", DEFAULT_SEED, minimum=0),
    )
