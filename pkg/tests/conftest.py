import numpy as np
import pytest

from sionqp.problems import ball, fig2a


@pytest.fixture(scope="session")
def ball_problem():
    return ball().problem


@pytest.fixture(scope="session")
def fig2a_builtin():
    return fig2a()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def emit(label: str, ok: bool, detail: str, elapsed: float) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail} ({elapsed:.1f}s)"
        lines.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
