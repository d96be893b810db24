from typing import Optional, Sequence, Union

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..tools.exceptions import (
    IndexOutOfRangeError,
    InvalidParametersError,
    NonHyperbolicError,
    NotSchottkyError,
)
from ..tools.safety import SafetyDecorators
from ..tools.units import parse_angle

"""
Module Overview:

This module builds the Schottky groups behind convex co-compact hyperbolic surfaces of
Euler characteristic -1 and provides the Moebius transformation algebra they need.

Key Classes:

- `MoebiusTransform`: Real 2x2 unit-determinant matrix acting on the upper half plane.
- `SurfaceSpec`: Surface family (three-funnel X, funneled torus Y, generic) and its parameters.
- `SchottkyGroup`: r generators with the cyclic convention S_{j+r} = S_j^{-1}.
- `Disk`: Euclidean disk centered on the real axis, used for the Schottky check.

Usage Guide:

1. Build a group with `build_three_funnel`, `build_funneled_torus` or `build_generic`,
   or from a spec string with `build_from_spec("X:12,13,14")`.
2. Access generators and inverses with `generator(group, j)` for j in 1..2r.
3. Convert traces to geodesic lengths with `trace_length`.
4. Check the disk configuration with `validate_schottky`.
"""

log = logging.getLogger(__name__)

# relative to the squared matrix norm, the scale of the rounding error of ad - bc
DET_TOLERANCE: float = 1e-12

# conjugator used when a generator fixes infinity and has no isometric circle
DISK_CONJUGATOR_ANGLE: float = math.pi / 8


@dataclass(frozen=True)
class MoebiusTransform:
    """
    Real Moebius transformation z -> (az + b) / (cz + d) with ad - bc = 1.

    Args:
        a (float): Upper left entry
        b (float): Upper right entry
        c (float): Lower left entry
        d (float): Lower right entry
    """

    a: float
    b: float
    c: float
    d: float

    def __repr__(self) -> str:
        return f"MoebiusTransform[{self.a:.6g}, {self.b:.6g}; {self.c:.6g}, {self.d:.6g}]"

    def __matmul__(self, other: "MoebiusTransform") -> "MoebiusTransform":
        return MoebiusTransform(
            a=self.a * other.a + self.b * other.c,
            b=self.a * other.b + self.b * other.d,
            c=self.c * other.a + self.d * other.c,
            d=self.c * other.b + self.d * other.d,
        )

    def __call__(self, z: complex) -> complex:
        if math.isinf(abs(z)):
            return self.a / self.c if self.c != 0 else complex("inf")
        denominator = self.c * z + self.d
        if denominator == 0:
            return complex("inf")
        return (self.a * z + self.b) / denominator

    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "MoebiusTransform":
        return cls(
            float(matrix[0, 0]),
            float(matrix[0, 1]),
            float(matrix[1, 0]),
            float(matrix[1, 1]),
        )

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def norm(self) -> float:
        return math.sqrt(self.a**2 + self.b**2 + self.c**2 + self.d**2)

    @property
    def is_hyperbolic(self) -> bool:
        return abs(self.trace) > 2.0

    def inverse(self) -> "MoebiusTransform":
        """
        Exact inverse of a unit-determinant matrix.
        """
        return MoebiusTransform(self.d, -self.b, -self.c, self.a)

    def power(self, k: int) -> "MoebiusTransform":
        result = MoebiusTransform.identity()
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            result = result @ base
        return result

    def derivative(self, z: complex) -> complex:
        return 1.0 / (self.c * z + self.d) ** 2

    def fixed_points(self) -> tuple[float, float]:
        """
        Fixed points on the boundary line, computed with a cancellation-free quadratic
        formula. A point at infinity is returned as ``math.inf``.

        Returns:
            tuple[float, float]: The two fixed points.

        Raises:
            NonHyperbolicError: If the transformation is not hyperbolic.
        """
        if not self.is_hyperbolic:
            raise NonHyperbolicError(
                f"|trace| = {abs(self.trace)} <= 2, no real fixed point pair", transform=self
            )

        # c z^2 + (d - a) z - b = 0
        p = self.d - self.a
        discriminant = self.trace**2 - 4.0
        root = math.sqrt(discriminant)

        if self.c == 0.0:
            return math.inf, self.b / (self.a - self.d)

        q = -0.5 * (p + math.copysign(root, p))
        return q / self.c, -self.b / q

    def isometric_circle(self) -> "Disk":
        """
        Isometric circle |cz + d| = 1.

        Raises:
            InvalidParametersError: If c = 0 (the transformation fixes infinity).
        """
        if self.c == 0.0:
            raise InvalidParametersError(
                f"{self!r} fixes infinity and has no isometric circle"
            )
        return Disk(center=-self.d / self.c, radius=1.0 / abs(self.c))

    def conjugate(self, by: "MoebiusTransform") -> "MoebiusTransform":
        """
        Returns by * self * by^{-1}.
        """
        return by @ self @ by.inverse()


@dataclass(frozen=True)
class Disk:
    """
    Euclidean disk with center on the real axis.

    Args:
        center (float): Center on the boundary line
        radius (float): Euclidean radius, strictly positive
    """

    center: float
    radius: float

    def __post_init__(self) -> None:
        self.checked_radius

    @property
    @SafetyDecorators.is_greater_than(0.0, error=InvalidParametersError)
    def checked_radius(self) -> float:
        return self.radius

    def gap_to(self, other: "Disk") -> float:
        """
        Distance between the closures; negative when they overlap.
        """
        return abs(self.center - other.center) - self.radius - other.radius


class SurfaceKind(enum.Enum):
    ThreeFunnel = "X"
    FunneledTorus = "Y"
    Generic = "G"

    def __repr__(self) -> str:
        return f"SurfaceKind[{self.value}]"


@dataclass(frozen=True)
class SurfaceSpec:
    """
    Surface family and its parameters.

    Args:
        kind (SurfaceKind): ThreeFunnel (l1, l2, l3), FunneledTorus (l1, l2, phi) or Generic.
        params (tuple[float, ...]): Hyperbolic lengths, and for tori the angle phi in radians.
        phi_text (str, optional): Literal the angle was given as (e.g. ``pi/2``), kept
            for reproducible spec strings.
    """

    kind: SurfaceKind
    params: tuple[float, ...]
    phi_text: Optional[str] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind is SurfaceKind.ThreeFunnel and len(self.params) != 3:
            raise InvalidParametersError(
                f"X surfaces take 3 lengths, got {self.params}"
            )
        if self.kind is SurfaceKind.FunneledTorus:
            if len(self.params) != 3:
                raise InvalidParametersError(
                    f"Y surfaces take (l1, l2, phi), got {self.params}"
                )
            self.phi
        self.min_length

    def __repr__(self) -> str:
        return f"SurfaceSpec[{format_surface_spec(self)}]"

    def __str__(self) -> str:
        return format_surface_spec(self)

    @property
    def lengths(self) -> tuple[float, ...]:
        if self.kind is SurfaceKind.FunneledTorus:
            return self.params[:2]
        return self.params

    @property
    @SafetyDecorators.is_greater_than(0.0, error=InvalidParametersError)
    def min_length(self) -> float:
        return min(self.lengths) if self.lengths else math.inf

    @property
    @SafetyDecorators.custom_criteria(
        lambda phi: 0.0 < phi < math.pi, "lie in (0, pi)", error=InvalidParametersError
    )
    def phi(self) -> float:
        """
        Angle of a funneled torus, in radians.
        """
        return self.params[2]


@dataclass(frozen=True)
class SchottkyGroup:
    """
    Schottky group freely generated by r hyperbolic transformations.

    Args:
        r (int): Number of generators
        gens (tuple[MoebiusTransform, ...]): The generators S_1..S_r
        spec (SurfaceSpec): Surface the group uniformizes
    """

    r: int
    gens: tuple[MoebiusTransform, ...]
    spec: SurfaceSpec

    def __post_init__(self) -> None:
        if self.r < 1 or len(self.gens) != self.r:
            raise InvalidParametersError(
                f"Expected {self.r} generators, got {len(self.gens)}"
            )
        for j, gen in enumerate(self.gens, start=1):
            if not gen.is_hyperbolic:
                raise NonHyperbolicError(
                    f"Generator S_{j} has |trace| = {abs(gen.trace)} <= 2"
                )
            if abs(gen.det - 1.0) > DET_TOLERANCE * gen.norm**2:
                raise InvalidParametersError(f"Generator S_{j} has det = {gen.det!r}")

    def __repr__(self) -> str:
        return f"SchottkyGroup[{format_surface_spec(self.spec)}]"

    def generator(self, j: int) -> MoebiusTransform:
        return generator(self, j)

    def word(self, letters: Sequence[int]) -> MoebiusTransform:
        """
        Product T = S_{letters[0]} ... S_{letters[-1]}.
        """
        result = MoebiusTransform.identity()
        for letter in letters:
            result = result @ generator(self, int(letter))
        return result

    def stack(self) -> np.ndarray:
        """
        All 2r generators as a (2r, 2, 2) array, row j-1 holding S_j.
        """
        return np.stack(
            [generator(self, j).as_array() for j in range(1, 2 * self.r + 1)]
        )

    @property
    def generator_lengths(self) -> tuple[float, ...]:
        return tuple(trace_length(gen) for gen in self.gens)


def generator(g: SchottkyGroup, j: int) -> MoebiusTransform:
    """
    Returns S_j under the cyclic convention S_{j+r} = S_j^{-1}.

    Args:
        g (SchottkyGroup): The group
        j (int): Index in 1..2r

    Returns:
        MoebiusTransform: S_j or the inverse of S_{j-r}.

    Raises:
        IndexOutOfRangeError: If j is outside 1..2r.
    """
    if not 1 <= j <= 2 * g.r:
        raise IndexOutOfRangeError(f"Generator index {j} outside 1..{2 * g.r}")
    if j <= g.r:
        return g.gens[j - 1]
    return g.gens[j - g.r - 1].inverse()


def trace_lengths(traces: Union[np.ndarray, float]) -> np.ndarray:
    """
    Vectorized trace-to-length conversion, l = 2 log(x + sqrt(x^2 - 1)) with x = |tr|/2,
    written so that neither large traces nor traces close to 2 lose precision.

    Args:
        traces: Traces, all with absolute value above 2.

    Returns:
        np.ndarray: Geodesic lengths.
    """
    x = np.abs(np.asarray(traces, dtype=float)) / 2.0
    return 2.0 * (np.log(x) + np.log1p(np.sqrt((1.0 - 1.0 / x) * (1.0 + 1.0 / x))))


def trace_length(T: MoebiusTransform) -> float:
    """
    Geodesic length of a hyperbolic transformation, 2 cosh(l/2) = |tr T|.

    Args:
        T (MoebiusTransform): Hyperbolic transformation

    Returns:
        float: Translation length l > 0.

    Raises:
        NonHyperbolicError: If |trace| <= 2.

    Example:
        >>> round(trace_length(MoebiusTransform(math.cosh(6), math.sinh(6), math.sinh(6), math.cosh(6))), 9)
        12.0
    """
    if not T.is_hyperbolic:
        raise NonHyperbolicError(
            f"|trace| = {abs(T.trace)} <= 2: not a hyperbolic element", transform=T
        )
    return float(trace_lengths(T.trace))


def fixed_point_multiplier(T: MoebiusTransform) -> float:
    """
    Derivative of T^{-1} at the repelling fixed point of T, evaluated from the fixed
    points themselves. For hyperbolic T it equals exp(-l(T)).

    Args:
        T (MoebiusTransform): Hyperbolic transformation

    Returns:
        float: Multiplier in (0, 1).

    Raises:
        NonHyperbolicError: If |trace| <= 2.
    """
    candidates = []
    for w in T.fixed_points():
        if math.isinf(w):
            # chart at infinity: (T^{-1})'(inf) = a / d when c = 0
            candidates.append(abs(T.a / T.d))
        else:
            # (T^{-1})(z) = (dz - b) / (-cz + a)
            candidates.append(1.0 / (T.a - T.c * w) ** 2)
    return min(candidates)


def _three_funnel_generators(l1: float, l2: float, l3: float) -> tuple[
    MoebiusTransform, ...
]:
    ch1, sh1 = math.cosh(l1 / 2), math.sinh(l1 / 2)
    ch2, sh2 = math.cosh(l2 / 2), math.sinh(l2 / 2)
    ch3 = math.cosh(l3 / 2)

    # tr(S1 S2^{-1}) = 2 ch1 ch2 - sh1 sh2 (a + 1/a); the -2 cosh(l3/2) branch of the
    # PSL trace equation is the one with a positive solution
    k = 2.0 * (ch1 * ch2 + ch3) / (sh1 * sh2)
    discriminant = k * k - 4.0
    if not math.isfinite(discriminant) or discriminant < 0.0:
        raise InvalidParametersError(
            f"No positive root a of the trace equation for X({l1}, {l2}, {l3})"
        )
    a = 0.5 * (k + math.sqrt(discriminant))

    s1 = MoebiusTransform(ch1, sh1, sh1, ch1)
    s2 = MoebiusTransform(ch2, a * sh2, sh2 / a, ch2)
    return s1, s2


def build_three_funnel(l1: float, l2: float, l3: float) -> SchottkyGroup:
    """
    Schottky group of the three-funnel surface X(l1, l2, l3).

    S_1 is symmetric with entries cosh(l1/2), sinh(l1/2); S_2 has off-diagonal entries
    a sinh(l2/2) and sinh(l2/2)/a, with a > 0 solving |tr(S_1 S_2^{-1})| = 2 cosh(l3/2).
    Of the two positive roots the larger one is used.

    Args:
        l1 (float): First boundary length
        l2 (float): Second boundary length
        l3 (float): Third boundary length

    Returns:
        SchottkyGroup: Two-generator group.

    Raises:
        InvalidParametersError: If a length is not positive or the trace equation has no root.
    """
    spec = SurfaceSpec(SurfaceKind.ThreeFunnel, (float(l1), float(l2), float(l3)))
    group = SchottkyGroup(r=2, gens=_three_funnel_generators(*spec.params), spec=spec)
    log.debug(f"[SCHOTTKY] Built {group!r}")
    return group


def build_funneled_torus(
    l1: float, l2: float, phi: float, phi_text: Optional[str] = None
) -> SchottkyGroup:
    """
    Schottky group of the funneled torus Y(l1, l2, phi).

    S_1 = diag(e^{l1/2}, e^{-l1/2}) and S_2 is the matrix with rows
    (cosh - cos(phi) sinh, sin^2(phi) sinh) and (sinh, cosh + cos(phi) sinh), all
    hyperbolic functions evaluated at l2/2.

    Args:
        l1 (float): Length of the first simple closed geodesic
        l2 (float): Length of the second simple closed geodesic
        phi (float): Angle between them, in (0, pi)
        phi_text (str, optional): Literal the angle was given as

    Returns:
        SchottkyGroup: Two-generator group.

    Raises:
        InvalidParametersError: If the parameters are out of range.
        NotSchottkyError: If the generators are not in Schottky position.
    """
    spec = SurfaceSpec(
        SurfaceKind.FunneledTorus, (float(l1), float(l2), float(phi)), phi_text=phi_text
    )
    half = l1 / 2
    s1 = MoebiusTransform(math.exp(half), 0.0, 0.0, math.exp(-half))

    ch2, sh2 = math.cosh(l2 / 2), math.sinh(l2 / 2)
    cos_phi, sin_phi = math.cos(phi), math.sin(phi)
    s2 = MoebiusTransform(
        ch2 - cos_phi * sh2,
        sin_phi**2 * sh2,
        sh2,
        ch2 + cos_phi * sh2,
    )

    group = SchottkyGroup(r=2, gens=(s1, s2), spec=spec)
    validate_schottky(group)
    log.debug(f"[SCHOTTKY] Built {group!r}")
    return group


def hyperbolic_from_fixed_points(
    repelling: float, attracting: float, length: float
) -> MoebiusTransform:
    """
    Hyperbolic transformation with the given fixed points and translation length.

    Args:
        repelling (float): Repelling fixed point
        attracting (float): Attracting fixed point
        length (float): Translation length

    Returns:
        MoebiusTransform: The transformation.
    """
    if repelling == attracting or length <= 0.0:
        raise InvalidParametersError(
            "Fixed points must differ and the length must be positive"
        )

    # C maps 0 -> repelling, inf -> attracting
    scale = 1.0 / math.sqrt(abs(attracting - repelling))
    sign = 1.0 if attracting > repelling else -1.0
    conjugator = MoebiusTransform(
        attracting * scale, sign * repelling * scale, scale, sign * scale
    )
    dilation = MoebiusTransform(math.exp(length / 2), 0.0, 0.0, math.exp(-length / 2))
    return dilation.conjugate(conjugator)


def build_generic(
    lengths: Sequence[float],
    fixed_points: Optional[Sequence[tuple[float, float]]] = None,
) -> SchottkyGroup:
    """
    Generic r-generator group with generators of the given lengths.

    Without explicit fixed points, generator j gets the repelling and attracting fixed
    points 4j and 4j + 1, which keeps the isometric circles disjoint for lengths above 4.

    Args:
        lengths (Sequence[float]): Translation lengths, one per generator
        fixed_points (Sequence[tuple[float, float]], optional): (repelling, attracting) per generator

    Returns:
        SchottkyGroup: The group.

    Raises:
        NotSchottkyError: If the generators are not in Schottky position.
    """
    if fixed_points is None:
        fixed_points = [(4.0 * j, 4.0 * j + 1.0) for j in range(len(lengths))]
    if len(fixed_points) != len(lengths):
        raise InvalidParametersError("One fixed point pair per generator is required")

    gens = tuple(
        hyperbolic_from_fixed_points(p, q, length)
        for (p, q), length in zip(fixed_points, lengths)
    )
    spec = SurfaceSpec(SurfaceKind.Generic, tuple(float(length) for length in lengths))
    group = SchottkyGroup(r=len(gens), gens=gens, spec=spec)
    validate_schottky(group)
    return group


def _disk_conjugator() -> MoebiusTransform:
    theta = DISK_CONJUGATOR_ANGLE
    return MoebiusTransform(
        math.cos(theta), math.sin(theta), -math.sin(theta), math.cos(theta)
    )


def schottky_disks(g: SchottkyGroup) -> list[Disk]:
    """
    Isometric circles of S_1..S_{2r}, as disks D_1..D_{2r}.

    When a generator fixes infinity, all generators are first conjugated by a fixed
    rotation about i so that every isometric circle exists.

    Args:
        g (SchottkyGroup): The group

    Returns:
        list[Disk]: Disk j-1 is the isometric circle of S_j.
    """
    elements = [generator(g, j) for j in range(1, 2 * g.r + 1)]
    if any(abs(element.c) < 1e-300 for element in elements):
        conjugator = _disk_conjugator()
        elements = [element.conjugate(conjugator) for element in elements]
    return [element.isometric_circle() for element in elements]


def validate_schottky(g: SchottkyGroup) -> list[Disk]:
    """
    Checks that the isometric circles of all generators and inverses have pairwise
    disjoint closures.

    Args:
        g (SchottkyGroup): The group

    Returns:
        list[Disk]: The 2r disks.

    Raises:
        NotSchottkyError: Naming the first overlapping pair (1-based) and the overlap amount.
    """
    disks = schottky_disks(g)
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            gap = disks[i].gap_to(disks[j])
            if gap <= 0.0:
                raise NotSchottkyError(
                    f"{g!r}: disks D_{i + 1} and D_{j + 1} overlap by {-gap:.6g}",
                    pair=(i + 1, j + 1),
                    overlap=-gap,
                )
    return disks


def parse_surface_spec(text: str) -> SurfaceSpec:
    """
    Parses ``X:l1,l2,l3`` or ``Y:l1,l2,phi`` (phi as ``pi/2`` style fraction or decimal).

    Args:
        text (str): Spec string

    Returns:
        SurfaceSpec: The parsed spec.

    Raises:
        InvalidParametersError: On malformed input.

    Example:
        >>> parse_surface_spec("X:12,13,14").params
        (12.0, 13.0, 14.0)
    """
    try:
        prefix, body = text.strip().split(":", 1)
        fields = [item.strip() for item in body.split(",")]
    except ValueError:
        raise InvalidParametersError(f"Malformed surface spec '{text}'") from None

    prefix = prefix.strip().upper()
    try:
        if prefix == "X":
            return SurfaceSpec(
                SurfaceKind.ThreeFunnel, tuple(float(item) for item in fields)
            )
        if prefix == "Y":
            if len(fields) != 3:
                raise InvalidParametersError(f"Y spec needs l1,l2,phi, got '{text}'")
            return SurfaceSpec(
                SurfaceKind.FunneledTorus,
                (float(fields[0]), float(fields[1]), parse_angle(fields[2])),
                phi_text=fields[2],
            )
        if prefix == "G":
            return SurfaceSpec(
                SurfaceKind.Generic, tuple(float(item) for item in fields)
            )
    except ValueError as error:
        if isinstance(error, InvalidParametersError):
            raise
        raise InvalidParametersError(
            f"Malformed number in surface spec '{text}'"
        ) from None

    raise InvalidParametersError(f"Unknown surface kind '{prefix}' in '{text}'")


def format_surface_spec(spec: SurfaceSpec) -> str:
    """
    Inverse of `parse_surface_spec`; lengths use 15 significant digits.
    """
    if spec.kind is SurfaceKind.FunneledTorus:
        l1, l2, phi = spec.params
        phi_text = spec.phi_text if spec.phi_text is not None else f"{phi:.15g}"
        return f"Y:{l1:.15g},{l2:.15g},{phi_text}"
    return f"{spec.kind.value}:" + ",".join(f"{value:.15g}" for value in spec.params)


def build_group(spec: SurfaceSpec) -> SchottkyGroup:
    """
    Builds the Schottky group for a parsed spec.
    """
    if spec.kind is SurfaceKind.ThreeFunnel:
        return build_three_funnel(*spec.params)
    if spec.kind is SurfaceKind.FunneledTorus:
        return build_funneled_torus(*spec.params, phi_text=spec.phi_text)
    return build_generic(spec.params)


def build_from_spec(text: str) -> SchottkyGroup:
    return build_group(parse_surface_spec(text))


def perturbation_family(
    spec: SurfaceSpec, steps: int, delta: float
) -> list[SurfaceSpec]:
    """
    Surfaces X(l1, l2 + k delta, l3 + 2k delta) for k = 0..steps, following resonance
    patterns away from a (symmetric) starting surface.

    Args:
        spec (SurfaceSpec): Three-funnel starting surface
        steps (int): Number of perturbation steps
        delta (float): Step size

    Returns:
        list[SurfaceSpec]: steps + 1 specs, starting with `spec`.
    """
    if spec.kind is not SurfaceKind.ThreeFunnel:
        raise InvalidParametersError("Perturbation families are defined for X surfaces")
    l1, l2, l3 = spec.params
    return [
        SurfaceSpec(SurfaceKind.ThreeFunnel, (l1, l2 + k * delta, l3 + 2 * k * delta))
        for k in range(steps + 1)
    ]
