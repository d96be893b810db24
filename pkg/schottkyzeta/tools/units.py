# Angle units and parsing for surface parameters
import math
import re
from dataclasses import dataclass

from .exceptions import InvalidParametersError

"""
Angle units

The units module defines the conversion factors for the angle parameter of funneled
tori and the parser used by the command line for angle literals.

Usage:
1. Use the `angle` class to pick a conversion factor (``angle.deg``, ``angle.pi``).
2. Use `convert_to_default` to convert a value to radians.
3. Use `parse_angle` to read literals such as ``pi/2``, ``2pi/5``, ``1.5708`` or ``90deg``.
"""


@dataclass
class angle:
    rad = 1.0
    deg = 0.017453292519943295
    pi = math.pi

    def __repr__(self) -> str:
        return f"angle"


def convert_to_default(value: float, from_unit: float) -> float:
    """
    Convert a value from an user unit to the default unit.

    Args:
        value (float): Value to convert
        from_unit (float): Unit corresponding to the value that is being converted to the default unit.

    Returns:
        float: Converted value in default units.

    Example:
        >>> round(convert_to_default(90, angle.deg), 6)
        1.570796
    """
    return value * from_unit


_PI_FRACTION = re.compile(
    r"^\s*(?P<num>[0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*(?P<den>[0-9]*\.?[0-9]+))?\s*$"
)
_DEGREES = re.compile(r"^\s*(?P<value>[-+]?[0-9]*\.?[0-9]+)\s*deg\s*$")


def parse_angle(text: str) -> float:
    """
    Parse an angle literal into radians.

    Accepted forms are rational multiples of pi (``pi``, ``pi/2``, ``2pi/5``,
    ``pi/2.5``), degrees (``90deg``) and plain decimals in radians.

    Args:
        text (str): Angle literal.

    Returns:
        float: Angle in radians.

    Raises:
        InvalidParametersError: If the literal cannot be read.

    Example:
        >>> parse_angle("pi/2") == math.pi / 2
        True
    """
    match = _PI_FRACTION.match(text.lower())
    if match is not None:
        num = float(match.group("num")) if match.group("num") else 1.0
        den = float(match.group("den")) if match.group("den") else 1.0
        if den == 0.0:
            raise InvalidParametersError(f"Zero denominator in angle '{text}'")
        return convert_to_default(num / den, angle.pi)

    match = _DEGREES.match(text.lower())
    if match is not None:
        return convert_to_default(float(match.group("value")), angle.deg)

    try:
        return float(text)
    except ValueError:
        raise InvalidParametersError(f"Cannot read angle '{text}'") from None
