import pytest

from baker_scope.construction import ParameterSequence, generate_strict


@pytest.fixture(scope="session")
def relaxed():
    return ParameterSequence((1, 2, 4), (2, 4, 8), parity=True)


@pytest.fixture(scope="session")
def strict():
    return generate_strict((1, 2, 4), parity=True, exponent_bit_budget=4096)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
