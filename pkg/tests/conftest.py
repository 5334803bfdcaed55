from __future__ import annotations

from pathlib import Path

import pytest

from greenbasket.footprint import load_daily_references

REPO_ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def shipped_references():
    return load_daily_references(DATA_DIR / "daily_references.txt")
