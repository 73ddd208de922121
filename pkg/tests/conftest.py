from pathlib import Path

import pytest

from amber.descriptors import MUTUALLY_EXCLUSIVE, Constraint, Scheme, categorical, numerical, ordinal

FIXTURES = Path(__file__).parent / "fixtures"

EMOTIONS = ("Anger", "Sadness", "Happiness", "Excited", "Neutral")


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def valence():
    return numerical("valence")


@pytest.fixture
def likert():
    return ordinal("intensity", ("low", "medium", "high"))


def category_scheme(constraint=MUTUALLY_EXCLUSIVE, names=EMOTIONS, time_constant=False):
    return Scheme("emotions", tuple(categorical(n) for n in names), constraint, time_constant)


def blended_scheme(p=0.4, q=0.6, names=EMOTIONS):
    return category_scheme(Constraint.blended(p, q), names)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
