import numpy as np
import pytest

from hedgehoglab.arithmetic import RotationAngle
from hedgehoglab.germs import (classify, henon_germ, quadratic1d_germ,
                               semiparabolic_multiplicity, with_classification)


@pytest.fixture(scope="session")
def golden():
    return RotationAngle.golden(80)


@pytest.fixture(scope="session")
def henon_desk():
    """Quadratic automorphism with eigenvalues (e^{2 pi i/3}, 0.1), normalized."""
    g, fp = henon_germ(RotationAngle.from_fraction(1, 3), 0.1, domain_radius=0.3)
    fp = with_classification(fp, classify(fp, None))
    return g, fp


@pytest.fixture(scope="session")
def henon_desk_nf(henon_desk):
    g, fp = henon_desk
    return semiparabolic_multiplicity(g, fp, jet_degree=8)


@pytest.fixture(scope="session")
def cauliflower():
    """f(z) = z + z^2."""
    g, fp = quadratic1d_germ(RotationAngle.from_fraction(0, 1))
    fp = with_classification(fp, classify(fp, None))
    return g, fp


@pytest.fixture(scope="session")
def cauliflower_nf(cauliflower):
    g, fp = cauliflower
    return semiparabolic_multiplicity(g, fp, jet_degree=8)


@pytest.fixture(scope="session")
def two_fifths_germ():
    """f(z) = e^{2 pi i 2/5} z + z^2."""
    g, fp = quadratic1d_germ(RotationAngle.from_fraction(2, 5))
    fp = with_classification(fp, classify(fp, None))
    return g, fp


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
