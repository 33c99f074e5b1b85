from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from smartkb import content
from smartkb.kb import KnowledgeBase, resolve_module_set
from smartkb.workspace import Workspace

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def kb() -> KnowledgeBase:
    """The shipped knowledge base, built in memory."""
    return resolve_module_set(content.build_all())


@pytest.fixture(scope="session")
def file_kb() -> KnowledgeBase:
    """The shipped knowledge base, parsed from the fixture files."""
    return Workspace.open(FIXTURES).kb


@pytest.fixture(scope="session")
def shapes():
    return Workspace.open(FIXTURES).shapes()


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance lines (one per criterion) after the run."""
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
