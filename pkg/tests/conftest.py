import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prodmetrics import Distribution, ProductSpace, Site  # noqa: E402


@pytest.fixture
def two_by_two():
    return ProductSpace((Site.discrete("a", 2), Site.discrete("b", 2)))


@pytest.fixture
def bernoulli_pair(two_by_two):
    half = [Fraction(1, 2), Fraction(1, 2)]
    mu = Distribution.product(two_by_two, [half, half])
    nu = Distribution.product(two_by_two, [[Fraction(3, 4), Fraction(1, 4)], half])
    return mu, nu
