import math

import numpy as np
import pytest

from fracvar.errors import ValidationError
from fracvar.special import gamma, reciprocal_gamma


def test_matches_reference_on_unit_interval_to_ten():
    # math.gamma is an independent implementation; spot the whole weight range.
    for x in np.linspace(0.01, 10.0, 997):
        assert abs(gamma(x) - math.gamma(x)) <= 1e-13 * math.gamma(x)


@pytest.mark.parametrize(
    "x,expected",
    [
        (0.5, math.sqrt(math.pi)),
        (1.0, 1.0),
        (1.5, math.sqrt(math.pi) / 2.0),
        (2.0, 1.0),
        (2.5, 3.0 * math.sqrt(math.pi) / 4.0),
        (5.0, 24.0),
    ],
)
def test_known_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-14)


def test_reflection_branch():
    # Gamma(-0.5) = -2 sqrt(pi)
    assert gamma(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-13)


def test_poles_raise():
    for bad in (0.0, -1.0, -7.0):
        with pytest.raises(ValidationError):
            gamma(bad)
    with pytest.raises(ValidationError):
        gamma(float("nan"))


def test_reciprocal_is_zero_at_poles():
    assert reciprocal_gamma(0.0) == 0.0
    assert reciprocal_gamma(-3.0) == 0.0
    assert reciprocal_gamma(2.5) == pytest.approx(1.0 / gamma(2.5), rel=1e-15)
