import pytest

from magnon_spt.model import EffectiveModel, fig2_lab_params

RESULTS = []  # (criterion, ok, detail), filled by test_acceptance.report


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def fig3_model():
    """Degenerate effective frequencies 8, unit damping and Kerr; couplings set per test."""
    return EffectiveModel(8.0, 8.0, 0.0, 0.0, 1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def fig5_setup():
    return fig2_lab_params(g_m=110.0, n2=-5)
