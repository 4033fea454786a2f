import os
import sys
from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpq

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(autouse=True)
def _no_mode_env(monkeypatch):
    monkeypatch.delenv("SYMCURV_MODE", raising=False)


def Q(*vals):
    """Exact object array from ints, Fractions or 'p/q' strings."""
    return np.array([mpq(Fraction(v)) for v in vals], dtype=object)


def rational_point(dim, seed):
    rng = np.random.default_rng(seed)
    return [mpq(int(k), 64) for k in rng.integers(-32, 33, size=dim)]


VERDICTS: dict = {}


@pytest.fixture
def verdict(request):
    """``verdict(number, checks)`` records one line per acceptance criterion,
    prints it, then asserts every check."""

    def record(number, checks: dict, note: str = ""):
        failed = [k for k, ok in checks.items() if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {number:>2}: {status}  {note}".rstrip()
        if failed:
            line += f"  (failed: {', '.join(failed)})"
        VERDICTS[number] = line
        print(line)
        assert not failed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
