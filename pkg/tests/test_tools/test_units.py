import math

import pytest

from schottkyzeta.tools.exceptions import InvalidParametersError
from schottkyzeta.tools.units import angle, convert_to_default, parse_angle


def test_convert():

    assert convert_to_default(180, angle.deg) == pytest.approx(math.pi)
    assert convert_to_default(1.2, angle.rad) == 1.2


@pytest.mark.parametrize(
    "text, value",
    [
        ("pi", math.pi),
        ("pi/2", math.pi / 2),
        ("2pi/5", 2 * math.pi / 5),
        ("2*pi/5", 2 * math.pi / 5),
        ("PI/2.5", math.pi / 2.5),
        ("90deg", math.pi / 2),
        ("1.2", 1.2),
    ],
)
def test_parse_angle(text, value):

    assert parse_angle(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["pi/0", "half", ""])
def test_parse_angle_errors(text):

    with pytest.raises(InvalidParametersError):
        parse_angle(text)
