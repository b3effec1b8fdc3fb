import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qdecay.spectral import make_analytic_breit_wigner, make_truncated_breit_wigner  # noqa: E402
from qdecay.states import make_gaussian_state  # noqa: E402


@pytest.fixture(scope="session")
def analytic_bw():
    return make_analytic_breit_wigner(1.0, 0.1)


@pytest.fixture(scope="session")
def standard_bw():
    """Truncated Breit-Wigner used across the suite: M=1, Gamma=0.1, mu_min=0.5, alpha=1."""
    return make_truncated_breit_wigner(1.0, 0.1, 0.5, 1.0)


@pytest.fixture(scope="session")
def even_packet():
    return make_gaussian_state((0.0, 0.0, 0.0), 0.1)
