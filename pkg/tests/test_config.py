"""
Unit tests for settings, the ordered worker map and logging setup.
"""

import logging

import pytest
from rich.logging import RichHandler

from src.selfnorm.config import DEFAULT_BUDGET, Settings, load_settings
from src.selfnorm.errors import ConfigError
from src.selfnorm.logs import configure_logging
from src.selfnorm.parallel import ordered_map


ENV_KEYS = ("SELFNORM_BUDGET", "SELFNORM_MAX_JOINS", "SELFNORM_PARALLEL", "SELFNORM_SEED")


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    """No SELFNORM_* variables, restored afterwards even if a .env file sets them."""
    for key in ENV_KEYS:
        monkeypatch.setenv(key, "0")
        monkeypatch.delenv(key)
    monkeypatch.chdir(tmp_path)
    return monkeypatch


class TestSettings:
    """
    Test Settings and load_settings.

    Goal: Environment values are validated; CLI overrides win.
    """

    def test_defaults(self, clean_env):
        """
        Test: With no variables set, defaults apply.
        Purpose: A bare environment works.
        """
        assert load_settings() == Settings()
        assert Settings().budget == DEFAULT_BUDGET

    def test_environment(self, clean_env):
        """
        Test: SELFNORM_BUDGET and SELFNORM_PARALLEL are read.
        Purpose: Configuration without flags.
        """
        clean_env.setenv("SELFNORM_BUDGET", "500")
        clean_env.setenv("SELFNORM_PARALLEL", "4")
        settings = load_settings()
        assert (settings.budget, settings.parallel) == (500, 4)

    def test_env_file(self, clean_env, tmp_path):
        """
        Test: A .env file supplies SELFNORM_SEED.
        Purpose: python-dotenv seeds the environment.
        """
        env_file = tmp_path / ".env"
        env_file.write_text("SELFNORM_SEED=7\n")
        assert load_settings(str(env_file)).seed == 7

    @pytest.mark.parametrize("key,value", [("SELFNORM_BUDGET", "lots"), ("SELFNORM_PARALLEL", "0"),
                                           ("SELFNORM_SEED", "-1")])
    def test_invalid(self, clean_env, key, value):
        """
        Test: Non-integer or out-of-range values raise ConfigError naming the variable.
        Purpose: Bad configuration fails before any work starts.
        """
        clean_env.setenv(key, value)
        with pytest.raises(ConfigError) as exc_info:
            load_settings()
        assert key in str(exc_info.value)

    def test_overrides(self):
        """
        Test: with_overrides ignores None and replaces the rest.
        Purpose: Unset CLI flags keep the environment value.
        """
        base = Settings(budget=100)
        changed = base.with_overrides(budget=None, parallel=3, slow_iso=True)
        assert (changed.budget, changed.parallel, changed.slow_iso) == (100, 3, True)
        assert base.parallel == 1


class TestOrderedMap:
    """Test ordered_map."""

    @pytest.mark.parametrize("workers", [1, 2, 8])
    def test_order_preserved(self, workers):
        """
        Test: Results come back in input order for any worker count.
        Purpose: Verdicts do not depend on --parallel.
        """
        assert ordered_map(lambda n: n * n, range(20), workers) == [n * n for n in range(20)]

    def test_empty(self):
        """
        Test: No items gives no results.
        Purpose: Edge case of the fan-out.
        """
        assert ordered_map(str, [], 4) == []


class TestLogging:
    """Test configure_logging."""

    def test_idempotent(self):
        """
        Test: Two calls leave one RichHandler; -v switches to DEBUG.
        Purpose: The CLI reconfigures logging on every invocation.
        """
        configure_logging(False)
        configure_logging(True)
        logger = logging.getLogger("src.selfnorm")
        # pytest attaches its own capture handlers to this non-propagating logger
        assert sum(isinstance(h, RichHandler) for h in logger.handlers) == 1
        assert logger.level == logging.DEBUG
        configure_logging(False)
        assert logger.level == logging.WARNING
