import sys
import warnings
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from htscatter.basis import DegenerateBoundary, ModelParams, TruncationSpec, enumerate_basis  # noqa: E402
from htscatter.hamiltonian import assemble  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

GOLDEN = Path(__file__).parent / "golden"


def build(n_q, g=1.0, L=16.0, even_only=True):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateBoundary)
        basis = enumerate_basis(ModelParams(M=1.0, L=L, g=g), TruncationSpec.qubits(n_q), even_only)
    return basis, assemble(basis)


@pytest.fixture(scope="session")
def small():
    return build(4, g=2.0)


@pytest.fixture(scope="session")
def medium():
    return build(6, g=1.0, even_only=False)


@pytest.fixture(scope="session")
def large():
    return build(10, g=1.0)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
