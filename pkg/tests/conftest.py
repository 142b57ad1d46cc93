from __future__ import annotations

import pytest

from thoughtloop import fixtures


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    rows = []
    for status in ("passed", "failed"):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "when", None) != "call":
                continue
            if "test_acceptance.py" in report.nodeid:
                rows.append((report.nodeid.split("::")[-1], status == "passed"))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in sorted(rows):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
from thoughtloop.envs.household import VERB_REGISTRY
from thoughtloop.parsing import GAME, LABELED, SHOP, SurfaceSyntax


@pytest.fixture(scope="session")
def wiki_corpus():
    return fixtures.wiki_corpus()


@pytest.fixture(scope="session")
def hotpotqa_set():
    return fixtures.hotpotqa_exemplars()


@pytest.fixture(scope="session")
def fever_set():
    return fixtures.fever_exemplars()


@pytest.fixture(scope="session")
def household_sets():
    return fixtures.household_exemplars()


@pytest.fixture(scope="session")
def shop_catalog():
    return fixtures.shop_catalog()


@pytest.fixture(scope="session")
def shop_goals():
    return fixtures.shop_goals()


@pytest.fixture
def labeled():
    return SurfaceSyntax(LABELED)


@pytest.fixture
def game():
    return SurfaceSyntax(GAME, VERB_REGISTRY)


@pytest.fixture
def shop_syntax():
    return SurfaceSyntax(SHOP)
