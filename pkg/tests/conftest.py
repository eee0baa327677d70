from __future__ import annotations

import pytest

from udts.structures import StructureFamily, make_bool_total, make_s01, make_s23, make_uint

R = 4  # desk-scale radix


@pytest.fixture
def s01():
    return make_s01(R)


@pytest.fixture
def s23():
    return make_s23(R)


@pytest.fixture
def gcc():
    return make_bool_total(R)


@pytest.fixture
def pairs(s01, s23):
    return StructureFamily("bool", (s01, s23))


@pytest.fixture
def uint_family():
    return StructureFamily("uint", (make_uint(R),))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.summary_lines(test_acceptance.RESULTS):
            terminalreporter.write_line(line)
