import warnings

import pytest

try:
    from numba.core.errors import NumbaWarning
except ImportError:          # pragma: no cover
    NumbaWarning = None


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        if NumbaWarning is not None:
            warnings.simplefilter("ignore", NumbaWarning)
        yield


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line; printed together at the end of the run."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(n, ok, detail, seconds):
        lines.append((n, f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} ({seconds:.2f} s)"))
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines, key=lambda x: x[0]):
            terminalreporter.write_line(line)
