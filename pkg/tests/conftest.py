"""
Shared fixtures for the selfnorm test suite.

Catalog groups are built once per session through build_named (which caches
per spec), so the heavier lattices (A5, SL2(5), PSL2(7)) are computed once.
"""

from pathlib import Path

import pytest

from src.selfnorm.catalog import build_named, parse_semidirect_file
from src.selfnorm.config import Settings


DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    """Directory holding the table and semidirect fixture files."""
    return DATA_DIR


@pytest.fixture(scope="session")
def settings():
    """Default settings: budget 2000, serial."""
    return Settings()


@pytest.fixture(scope="session")
def group():
    """Factory: group('S:4') -> cached catalog group."""
    return build_named


@pytest.fixture(scope="session")
def semidirect(data_dir):
    """Factory: semidirect('c3_inversion') -> (spec, built group)."""
    def load(stem):
        spec = parse_semidirect_file(data_dir / "sd" / f"{stem}.txt")
        return spec, spec.build(name=f"sd:{stem}")
    return load
