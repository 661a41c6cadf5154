from __future__ import annotations

import pytest

from apftower import make_family_tower


@pytest.fixture(scope="session")
def p7():
    """Non-spectral tower N_j = 7^(2j-1), M_j = 2."""
    return make_family_tower("nonspectral-4k3", p=7)


@pytest.fixture(scope="session")
def p7_powers():
    return make_family_tower("odd-prime-power", p=7)


@pytest.fixture(scope="session")
def qc():
    return make_family_tower("quarter-cantor")


_ACCEPTANCE: list = []


@pytest.fixture()
def criterion():
    """Record one acceptance line; printed again in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE.append((number, line))

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
