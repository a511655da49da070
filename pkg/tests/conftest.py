import numpy as np
import pytest

from hvlab.model import ControlParams, Params

STABLE = Params(m=1.2, c=0.3, d=0.4, e=0.25, a=0.2, p=0.7)
CYCLE = Params(m=1.2, c=1.0, d=0.7, e=0.2, a=0.2, p=0.7)
HOPF = Params(m=1.2, c=0.25, d=1.0, e=0.45, a=0.2, p=0.5)
CONTROL = ControlParams(b=0.3, b1=0.3, b2=0.2, b3=0.7)


@pytest.fixture
def stable():
    return STABLE


@pytest.fixture
def cycle():
    return CYCLE


@pytest.fixture
def hopf_set():
    return HOPF


@pytest.fixture
def control():
    return CONTROL


def central_diff_jacobian(f, s, rel_step=1e-6):
    """Central finite differences with step ``rel_step * max(1, |s_i|)``."""
    s = np.asarray(s, dtype=float)
    f0 = np.asarray(f(s), dtype=float)
    J = np.empty((len(f0), len(s)))
    for i in range(len(s)):
        h = rel_step * max(1.0, abs(s[i]))
        sp, sm = s.copy(), s.copy()
        sp[i] += h
        sm[i] -= h
        J[:, i] = (np.asarray(f(sp)) - np.asarray(f(sm))) / (2 * h)
    return J


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, ok: bool, detail: str) -> None:
    """Print and remember one pass/fail line for the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
