import numpy as np
import pytest
from hypothesis import settings

from tworo.problems import toy_t1, toy_t2
from tworo.runner import prepare

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def t1():
    return prepare(toy_t1())


@pytest.fixture
def t2():
    return prepare(toy_t2())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_VERDICTS: list = []


@pytest.fixture
def verdict():
    """Record and print one pass/fail line for an acceptance criterion."""
    def record(name: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        print(line)
        _VERDICTS.append(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
