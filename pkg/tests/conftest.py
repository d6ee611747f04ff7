import pytest

from doublon_bic.model import AtomSpec, CouplingVariant, SystemConfig, WaveguideParams

SP = CouplingVariant.SINGLE_PHOTON
TP = CouplingVariant.TWO_PHOTON


def make_system(N, points, variant=SP, g=0.3, delta1=5.0, delta2=5.0, U=10.0, J=1.0):
    """``points`` is a list of coupling-point tuples, one per atom (1-based)."""
    atoms = tuple(AtomSpec(delta1=delta1, coupling_points=tuple(p), g=g, delta2=delta2)
                  for p in points)
    return SystemConfig(WaveguideParams(N=N, J=J, U=U), atoms, variant)


@pytest.fixture
def small_sp():
    return make_system(6, [(2, 4), (3, 5)], SP, g=0.3)


@pytest.fixture
def small_tp():
    return make_system(6, [(2, 4), (3, 5)], TP, g=0.3, delta1=10.0, delta2=0.0)


# acceptance criteria report: one line per criterion, repeated in the summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
