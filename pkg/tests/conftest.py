import pytest

from solitonlab import bryant, models


@pytest.fixture(scope="session")
def profile():
    """Shared high-accuracy profile reaching the full level window."""
    return bryant.integrate(bryant.seed(), r_max=220.0, tol=1e-10)


@pytest.fixture(scope="session")
def short_profile():
    return bryant.integrate(bryant.seed(), r_max=60.0, tol=1e-10)


@pytest.fixture(scope="session")
def cigar_line():
    return models.CigarLine.from_limit_curvature(0.5)
