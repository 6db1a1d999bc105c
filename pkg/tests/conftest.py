from __future__ import annotations

import sys
from pathlib import Path

import pytest

# make the sibling oracle module importable from every test file
sys.path.insert(0, str(Path(__file__).parent))

DATASETS = Path(__file__).parent.parent / "datasets"


@pytest.fixture(scope="session")
def datasets_dir() -> Path:
    return DATASETS


@pytest.fixture(scope="session")
def blocks_domain_text() -> str:
    return (DATASETS / "blocks" / "domain.pddl").read_text()


@pytest.fixture(scope="session")
def logistics_domain_text() -> str:
    return (DATASETS / "logistics" / "domain.pddl").read_text()
