from fractions import Fraction as F

import pytest

from sweepout.exactreal import GeneratorBasis
from sweepout.measures import DiscreteMeasure, MeasureSequence


@pytest.fixture(scope="session")
def surd_basis():
    return GeneratorBasis.from_specs(["sqrt:2", "sqrt:3"])


@pytest.fixture(scope="session")
def rat_basis():
    return GeneratorBasis.rationals()


@pytest.fixture(scope="session")
def root2_over8(surd_basis):
    return surd_basis.point(["0", "1/8", "0"])


@pytest.fixture(scope="session")
def root3_over4(surd_basis):
    return surd_basis.point(["0", "0", "1/4"])


@pytest.fixture(scope="session")
def mu_pair(surd_basis, root2_over8, root3_over4):
    """The two-atom measure (sqrt2/8 and sqrt3/4, masses 1/2 each)."""
    return DiscreteMeasure([root2_over8, root3_over4], [F(1, 2), F(1, 2)])


def geometric_sequence(basis, count):
    """mu_n = (d[sqrt2/4^n] + d[sqrt3/4^n]) / 2 for n = 1..count."""
    measures = []
    for n in range(1, count + 1):
        s = F(1, 4**n)
        measures.append(DiscreteMeasure(
            [basis.point(["0", s, "0"]), basis.point(["0", "0", s])],
            [F(1, 2), F(1, 2)]))
    return MeasureSequence(measures)


@pytest.fixture(scope="session")
def geom_seq(surd_basis):
    return geometric_sequence(surd_basis, 40)
