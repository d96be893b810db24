from typing import Any, Optional, Sequence, Union

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..geometry.words import LengthCache
from ..tools.exceptions import (
    BoundaryZeroError,
    CacheFormatError,
    FloorViolationError,
    InvalidParametersError,
    NoConvergenceError,
    OnPathZeroError,
    SchottkyZetaError,
)
from ..tools.logger import Logger
from ..tools.safety import SafetyDecorators
from ..tools.utilities import chunked, ordered_map
from .zeta import ZetaConfig, zeta_eval, zeta_values

"""
Module Overview:

Zero counting and location for the truncated zeta function by the sampled argument
principle. The change of arg Z along a segment is the sum of principal-branch
increments between consecutive samples, refined by bisection wherever an increment is
large. Rectangles get a winding count from their four edges; bin grids share every
edge between neighbouring bins, and each positive bin seeds a Newton refinement.

Key Classes:

- `Rect`: Axis-parallel rectangle of the s-plane.
- `SamplingConfig`: Edge sampling, bisection and retry settings.
- `RefineConfig`: Newton iteration settings.
- `BinGrid`: Per-bin zero counts and winding residuals of a rectangle.
- `Resonance`: A located zero with its multiplicity and residual.
- `ResonanceList`: Resonances plus the rectangle they cover and run metadata.

Usage Guide:

1. Count zeros of a rectangle with `rect_winding(cache, rect)`.
2. Count per bin with `bin_count_grid(cache, rect, nx, ny)`.
3. Locate all zeros with `locate_all(cache, rect, pixel)`.
4. Persist results with `write_resonances` and `read_resonances`.
"""

log = logging.getLogger(__name__)

MANIFEST_PREFIX = "# manifest "
RESONANCE_COLUMNS = ["re", "im", "multiplicity", "residual"]


@dataclass(frozen=True)
class Rect:
    """
    Axis-parallel rectangle [re_min, re_max] x [im_min, im_max].
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self) -> None:
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InvalidParametersError(f"Degenerate rectangle {self.as_tuple()}")

    def __repr__(self) -> str:
        return f"Rect[{self.re_min:g},{self.re_max:g}]x[{self.im_min:g},{self.im_max:g}]"

    @classmethod
    def parse(cls, text: str) -> "Rect":
        """
        Reads ``re0,re1,im0,im1``.

        Example:
            >>> Rect.parse("0,0.1,0,40").im_max
            40.0
        """
        try:
            values = [float(item) for item in text.split(",")]
        except ValueError:
            raise InvalidParametersError(f"Malformed rectangle '{text}'") from None
        if len(values) != 4:
            raise InvalidParametersError(
                f"Rectangle needs re0,re1,im0,im1, got '{text}'"
            )
        return cls(*values)

    @classmethod
    def around(cls, center: complex, radius: float) -> "Rect":
        return cls(
            center.real - radius,
            center.real + radius,
            center.imag - radius,
            center.imag + radius,
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.re_min, self.re_max, self.im_min, self.im_max)

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def center(self) -> complex:
        return complex(
            0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max)
        )

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (
            self.re_min - margin <= z.real <= self.re_max + margin
            and self.im_min - margin <= z.imag <= self.im_max + margin
        )

    def covers(self, other: "Rect") -> bool:
        return (
            self.re_min <= other.re_min
            and other.re_max <= self.re_max
            and self.im_min <= other.im_min
            and other.im_max <= self.im_max
        )

    def conjugate(self) -> "Rect":
        return Rect(self.re_min, self.re_max, -self.im_max, -self.im_min)

    def shifted(self, dx: float, dy: float) -> "Rect":
        return Rect(
            self.re_min + dx, self.re_max + dx, self.im_min + dy, self.im_max + dy
        )

    def split(self, axis: str, at: Optional[float] = None) -> tuple["Rect", "Rect"]:
        """
        Bisects along ``"re"`` or ``"im"`` at `at` (default: the midpoint).
        """
        if axis == "re":
            at = 0.5 * (self.re_min + self.re_max) if at is None else at
            left = Rect(self.re_min, at, self.im_min, self.im_max)
            return left, Rect(at, self.re_max, self.im_min, self.im_max)
        at = 0.5 * (self.im_min + self.im_max) if at is None else at
        lower = Rect(self.re_min, self.re_max, self.im_min, at)
        return lower, Rect(self.re_min, self.re_max, at, self.im_max)

    def quadrants(self) -> list["Rect"]:
        left, right = self.split("re")
        return [*left.split("im"), *right.split("im")]


@dataclass
class SamplingConfig:
    """
    Argument-principle sampling settings.

    Args:
        min_spacing (float): Largest distance between initial samples. Defaults to 0.01.
        min_samples (int): Fewest intervals per edge. Defaults to 8.
        max_increment (float): Increments above this are bisected. Defaults to pi/2.
        max_depth (int): Bisection depth limit. Defaults to 12.
        zero_floor (float): |Z| below this counts as a zero on the path. Defaults to 1e-13.
        retries (int): Perturbations tried after a zero on the path. Defaults to 3.
        perturbation (float): Shift factor, applied as perturbation * extent * 10^-k.
        residual_limit (float): Winding residual above which counts are re-sampled.
        threads (int): Worker threads for edges and refinements. Defaults to 1.
        zeta (ZetaConfig): Truncation policy for the zeta evaluations.
    """

    min_spacing: float = 0.01
    min_samples: int = 8
    max_increment: float = math.pi / 2
    max_depth: int = 12
    zero_floor: float = 1e-13
    retries: int = 3
    perturbation: float = 0.37
    residual_limit: float = 0.25
    threads: int = 1
    zeta: ZetaConfig = field(default_factory=ZetaConfig)

    def finer(self) -> "SamplingConfig":
        return replace(
            self, min_spacing=self.min_spacing / 4, min_samples=self.min_samples * 2
        )


@dataclass
class RefineConfig:
    """
    Newton refinement settings.

    Args:
        tol (float): Target |Z| at the zero. Defaults to 1e-10.
        max_iter (int): Iteration limit. Defaults to 50.
        step_tol (float): Steps shorter than this stop the iteration. Defaults to 1e-13.
        guard_widths (float): Half size of the guard box in bin widths. Defaults to 3.
        min_radius (float): Smallest half size of the verification rectangle. Defaults to 1e-4.
    """

    tol: float = 1e-10
    max_iter: int = 50
    step_tol: float = 1e-13
    guard_widths: float = 3.0
    min_radius: float = 1e-4


DEFAULT_SAMPLING_CONFIG = SamplingConfig()
DEFAULT_REFINE_CONFIG = RefineConfig()


@dataclass(frozen=True)
class Resonance:
    """
    A zero of the zeta function.

    Args:
        position (complex): Location
        multiplicity (int): Order, from a verification winding
        residual (float): |Z(position)|
        bin (tuple[int, int], optional): (re index, im index) of the originating bin
        refined (bool): False when Newton failed and the bin center stands in
        merged (bool): True when a nearby duplicate was folded into this entry
    """

    position: complex
    multiplicity: int
    residual: float
    bin: Optional[tuple[int, int]] = None
    refined: bool = True
    merged: bool = False

    def __post_init__(self) -> None:
        self.checked_multiplicity

    def __repr__(self) -> str:
        return f"Resonance[{self.position.real:.6f}{self.position.imag:+.6f}i, m={self.multiplicity}]"

    @property
    @SafetyDecorators.is_positive(error=InvalidParametersError)
    def checked_multiplicity(self) -> int:
        return self.multiplicity


@dataclass
class BinGrid:
    """
    Zero counts of the bins of a rectangle.

    Args:
        rect (Rect): Covered rectangle
        nx (int): Bins along Re s
        ny (int): Bins along Im s
        counts (np.ndarray): (nx, ny) winding counts
        residuals (np.ndarray): (nx, ny) distance of each winding sum from its integer
        xs (np.ndarray): nx + 1 vertical grid line positions
        ys (np.ndarray): ny + 1 horizontal grid line positions
        total (int): Winding count of the outer boundary
        resampled (list[tuple[int, int]]): Bins recounted with finer sampling
    """

    rect: Rect
    nx: int
    ny: int
    counts: np.ndarray
    residuals: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    total: int
    resampled: list[tuple[int, int]] = field(default_factory=list)

    def __repr__(self) -> str:
        return f"BinGrid[{self.nx}x{self.ny}, total={self.total}]"

    @property
    def consistent(self) -> bool:
        return int(self.counts.sum()) == self.total

    def bin_rect(self, i: int, j: int) -> Rect:
        return Rect(
            float(self.xs[i]),
            float(self.xs[i + 1]),
            float(self.ys[j]),
            float(self.ys[j + 1]),
        )

    def cell_of(self, z: complex) -> Optional[tuple[int, int]]:
        """
        Index of the bin holding `z`, or None outside the grid.
        """
        if not self.rect.contains(z):
            return None
        i = int(
            np.clip(np.searchsorted(self.xs, z.real, side="right") - 1, 0, self.nx - 1)
        )
        j = int(
            np.clip(np.searchsorted(self.ys, z.imag, side="right") - 1, 0, self.ny - 1)
        )
        return i, j

    def positive_bins(self) -> list[tuple[int, int]]:
        """
        Bins with a positive count, ordered by Im then Re.
        """
        return [(int(i), int(j)) for j, i in zip(*np.nonzero(self.counts.T > 0))]

    def aggregate(self, fx: int, fy: int) -> np.ndarray:
        """
        Sums blocks of fx by fy bins; nx and ny must be divisible.
        """
        if self.nx % fx or self.ny % fy:
            raise InvalidParametersError(
                f"Cannot aggregate {self.nx}x{self.ny} bins by {fx}x{fy}"
            )
        blocks = self.counts.reshape(self.nx // fx, fx, self.ny // fy, fy)
        return blocks.sum(axis=(1, 3))


@dataclass
class ResonanceList:
    """
    Resonances with the rectangle they were located in and the run metadata.
    """

    resonances: list[Resonance]
    coverage: Optional[Rect] = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __repr__(self) -> str:
        return f"ResonanceList[{len(self.resonances)} resonances]"

    def __len__(self) -> int:
        return len(self.resonances)

    def __iter__(self):
        return iter(self.resonances)

    def positions(self) -> np.ndarray:
        return np.array([res.position for res in self.resonances], dtype=complex)

    def multiplicities(self) -> np.ndarray:
        return np.array([res.multiplicity for res in self.resonances], dtype=np.int64)


def check_floor(rect: Rect, config: SamplingConfig) -> None:
    if rect.re_min < config.zeta.floor:
        raise FloorViolationError(
            f"{rect!r} reaches below the evaluation floor Re s = {config.zeta.floor}",
            floor=config.zeta.floor,
        )


@dataclass
class _EdgeStats:
    samples: int = 0
    bisections: int = 0


def _evaluate(
    cache: LengthCache, points: np.ndarray, config: SamplingConfig
) -> np.ndarray:
    if len(points) == 0:
        return np.zeros(0, dtype=complex)
    values = zeta_values(cache, points, config=config.zeta).values
    small = np.abs(values) < config.zero_floor
    if small.any():
        location = complex(points[int(np.argmax(small))])
        raise OnPathZeroError(
            f"|Z| < {config.zero_floor:g} at {location} on a sampled path",
            location=location,
        )
    return values


def _edge_deltas(
    cache: LengthCache,
    starts: np.ndarray,
    ends: np.ndarray,
    config: SamplingConfig,
    start_values: Optional[np.ndarray] = None,
    end_values: Optional[np.ndarray] = None,
    stats: Optional[_EdgeStats] = None,
) -> np.ndarray:
    """
    Change of arg Z along each segment starts[e] -> ends[e].

    Endpoint values may be supplied by the caller so that vertices shared between
    segments are evaluated once. Samples are equally spaced with m = max(min_samples,
    ceil(length / min_spacing)) intervals; increments above `max_increment` are
    bisected level by level, all segments at once.
    """
    stats = stats if stats is not None else _EdgeStats()
    starts = np.asarray(starts, dtype=complex)
    ends = np.asarray(ends, dtype=complex)
    count = len(starts)

    if start_values is None or end_values is None:
        vertices, inverse = np.unique(
            np.concatenate([starts, ends]), return_inverse=True
        )
        values = _evaluate(cache, vertices, config)
        vertex_values = values[np.asarray(inverse).reshape(-1)]
        stats.samples += len(vertices)
        start_values, end_values = vertex_values[:count], vertex_values[count:]

    spans = np.abs(ends - starts)
    steps = np.ceil(spans / config.min_spacing)
    intervals = np.maximum(config.min_samples, steps).astype(np.int64)
    intervals[spans == 0.0] = 0

    interior = []
    for start, end, m in zip(starts, ends, intervals):
        if m == 0:
            interior.append(np.zeros(0, dtype=complex))
            continue
        re = np.linspace(start.real, end.real, m + 1)[1:-1]
        im = np.linspace(start.imag, end.imag, m + 1)[1:-1]
        interior.append(re + 1j * im)
    interior_values = _evaluate(
        cache, np.concatenate(interior) if interior else np.zeros(0, complex), config
    )
    stats.samples += len(interior_values)

    sa, sb, za, zb, owners = [], [], [], [], []
    offset = 0
    for e in range(count):
        m = int(intervals[e])
        if m == 0:
            continue
        points = np.concatenate([[starts[e]], interior[e], [ends[e]]])
        inner = interior_values[offset : offset + m - 1]
        values = np.concatenate([[start_values[e]], inner, [end_values[e]]])
        offset += m - 1
        sa.append(points[:-1])
        sb.append(points[1:])
        za.append(values[:-1])
        zb.append(values[1:])
        owners.append(np.full(m, e, dtype=np.int64))

    if not owners:
        return np.zeros(count)

    left, right = np.concatenate(sa), np.concatenate(sb)
    left_values, right_values = np.concatenate(za), np.concatenate(zb)
    owner = np.concatenate(owners)
    settled_increments, settled_owners = [], []

    for depth in range(config.max_depth + 1):
        increments = np.angle(right_values / left_values)
        large = np.abs(increments) > config.max_increment
        if depth == config.max_depth and large.any():
            # a zero this close to the path cannot be resolved, move the path instead
            worst = int(np.argmax(np.where(large, np.abs(increments), -1.0)))
            location = complex(0.5 * (left[worst] + right[worst]))
            raise OnPathZeroError(
                f"{int(large.sum())} increment(s) above {config.max_increment:.3f} "
                f"at bisection depth {depth}, near {location}",
                location=location,
            )

        settled_increments.append(increments[~large])
        settled_owners.append(owner[~large])
        if not large.any():
            break

        middle = 0.5 * (left[large] + right[large])
        middle_values = _evaluate(cache, middle, config)
        stats.samples += len(middle)
        stats.bisections += len(middle)

        left = np.concatenate([left[large], middle])
        right = np.concatenate([middle, right[large]])
        new_left_values = np.concatenate([left_values[large], middle_values])
        right_values = np.concatenate([middle_values, right_values[large]])
        left_values = new_left_values
        owner = np.concatenate([owner[large], owner[large]])

    return np.bincount(
        np.concatenate(settled_owners),
        weights=np.concatenate(settled_increments),
        minlength=count,
    )


def _is_canonical(p: complex, q: complex) -> bool:
    return (p.real, p.imag) <= (q.real, q.imag)


def edge_arg_delta(
    cache: LengthCache,
    p: complex,
    q: complex,
    min_spacing: Optional[float] = None,
    min_samples: Optional[int] = None,
    config: SamplingConfig = DEFAULT_SAMPLING_CONFIG,
) -> float:
    """
    Change of arg Z along the axis-parallel segment from p to q, in radians.

    The segment is always sampled in its canonical direction (increasing Re, then Im),
    so reversing it negates the result exactly.

    Args:
        cache (LengthCache): Length cache
        p (complex): Start point
        q (complex): End point
        min_spacing (float, optional): Overrides `config.min_spacing`
        min_samples (int, optional): Overrides `config.min_samples`
        config (SamplingConfig): Sampling settings

    Returns:
        float: Sum of the principal-branch increments.

    Raises:
        InvalidParametersError: If the segment is not axis parallel.
        OnPathZeroError: If |Z| falls below the zero floor at a sample.
    """
    p, q = complex(p), complex(q)
    if p.real != q.real and p.imag != q.imag:
        raise InvalidParametersError(f"Segment {p} -> {q} is not axis parallel")
    if p == q:
        return 0.0

    overrides = {}
    if min_spacing is not None:
        overrides["min_spacing"] = min_spacing
    if min_samples is not None:
        overrides["min_samples"] = min_samples
    config = replace(config, **overrides) if overrides else config

    if not _is_canonical(p, q):
        return -edge_arg_delta(cache, q, p, config=config)
    return float(_edge_deltas(cache, np.array([p]), np.array([q]), config)[0])


def _rect_total(cache: LengthCache, rect: Rect, config: SamplingConfig) -> float:
    a = complex(rect.re_min, rect.im_min)
    b = complex(rect.re_max, rect.im_min)
    c = complex(rect.re_max, rect.im_max)
    d = complex(rect.re_min, rect.im_max)

    # bottom a->b, right b->c, top d->c (reversed), left a->d (reversed)
    bottom, right, top, left = _edge_deltas(
        cache, np.array([a, b, d, a]), np.array([b, c, c, d]), config
    )
    return float(bottom + right - top - left)


def _nearest_side(rect: Rect, location: complex) -> int:
    distances = [
        abs(location.imag - rect.im_min),
        abs(location.real - rect.re_max),
        abs(location.imag - rect.im_max),
        abs(location.real - rect.re_min),
    ]
    return int(np.argmin(distances))


def _push_side(rect: Rect, side: int, shift: float) -> Rect:
    re_min, re_max, im_min, im_max = rect.as_tuple()
    if side == 0:
        im_min -= shift
    elif side == 1:
        re_max += shift
    elif side == 2:
        im_max += shift
    else:
        re_min -= shift
    return Rect(re_min, re_max, im_min, im_max)


def rect_winding(
    cache: LengthCache,
    rect: Rect,
    config: SamplingConfig = DEFAULT_SAMPLING_CONFIG,
) -> tuple[int, float]:
    """
    Number of zeros of Z inside `rect`, counted with multiplicity.

    A winding sum further than `residual_limit` from an integer is recomputed once with
    four times denser sampling. A zero on the boundary moves the offending side outward
    by perturbation * extent * 10^-k for k = 1..retries.

    Args:
        cache (LengthCache): Length cache
        rect (Rect): Rectangle
        config (SamplingConfig): Sampling settings

    Returns:
        tuple[int, float]: (count, residual) with residual = |winding / 2pi - count|.

    Raises:
        FloorViolationError: If the rectangle reaches below the evaluation floor.
        BoundaryZeroError: If every perturbation still meets a zero on the boundary.
    """
    check_floor(rect, config)
    extent = min(rect.width, rect.height)
    current = rect

    for attempt in range(config.retries + 1):
        try:
            winding = _rect_total(cache, current, config) / (2 * math.pi)
            count = int(round(winding))
            residual = abs(winding - count)
            if residual > config.residual_limit:
                log.info(f"[ZEROS] {current!r}: residual {residual:.3f}, resampling")
                winding = _rect_total(cache, current, config.finer()) / (2 * math.pi)
                count = int(round(winding))
                residual = abs(winding - count)
                if residual > config.residual_limit:
                    log.warning(
                        f"[ZEROS] {current!r}: residual {residual:.3f} after resampling"
                    )
            return count, residual
        except OnPathZeroError as error:
            if attempt == config.retries:
                raise BoundaryZeroError(
                    f"{rect!r}: zero on the boundary near {error.location} "
                    f"after {config.retries} perturbations",
                    location=error.location,
                ) from error
            shift = config.perturbation * extent * 10.0 ** -(attempt + 1)
            current = _push_side(current, _nearest_side(current, error.location), shift)
            log.debug(
                f"[ZEROS] Zero on path at {error.location}, retrying with {current!r}"
            )

    raise AssertionError("unreachable")


def _line_work(
    cache: LengthCache,
    config: SamplingConfig,
    xs: np.ndarray,
    ys: np.ndarray,
    vertex: np.ndarray,
):
    def horizontal(j: int) -> tuple[np.ndarray, _EdgeStats]:
        stats = _EdgeStats()
        deltas = _edge_deltas(
            cache,
            xs[:-1] + 1j * ys[j],
            xs[1:] + 1j * ys[j],
            config,
            vertex[:-1, j],
            vertex[1:, j],
            stats,
        )
        return deltas, stats

    def vertical(i: int) -> tuple[np.ndarray, _EdgeStats]:
        stats = _EdgeStats()
        deltas = _edge_deltas(
            cache,
            xs[i] + 1j * ys[:-1],
            xs[i] + 1j * ys[1:],
            config,
            vertex[i, :-1],
            vertex[i, 1:],
            stats,
        )
        return deltas, stats

    return horizontal, vertical


def _grid_pass(
    cache: LengthCache,
    xs: np.ndarray,
    ys: np.ndarray,
    config: SamplingConfig,
    logger: Optional[Logger],
) -> tuple[np.ndarray, np.ndarray]:
    nx, ny = len(xs) - 1, len(ys) - 1
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    vertices = (grid_x + 1j * grid_y).reshape(-1)
    vertex = _evaluate(cache, vertices, config).reshape(nx + 1, ny + 1)

    progress = {"lines_done": 0, "samples": len(vertices), "bisections": 0}
    if logger is not None:
        logger.add_attributes(progress, ["lines_done", "samples", "bisections"])

    horizontal, vertical = _line_work(cache, config, xs, ys, vertex)
    jobs = [("h", j) for j in range(ny + 1)] + [("v", i) for i in range(nx + 1)]
    H = np.zeros((ny + 1, nx))
    V = np.zeros((nx + 1, ny))

    def run(job: tuple[str, int]) -> tuple[np.ndarray, _EdgeStats]:
        kind, index = job
        return horizontal(index) if kind == "h" else vertical(index)

    for batch in chunked(jobs, max(1, 4 * config.threads)):
        for (kind, index), (deltas, stats) in zip(
            batch, ordered_map(run, batch, config.threads)
        ):
            if kind == "h":
                H[index] = deltas
            else:
                V[index] = deltas
            progress["lines_done"] += 1
            progress["samples"] += stats.samples
            progress["bisections"] += stats.bisections
        if logger is not None:
            logger.update()

    log.debug(
        f"[ZEROS] Grid {nx}x{ny}: {progress['samples']} samples, {progress['bisections']} bisections"
    )
    return H, V


def _nearest_line(xs: np.ndarray, ys: np.ndarray, location: complex) -> tuple[str, int]:
    i = int(np.argmin(np.abs(xs - location.real)))
    j = int(np.argmin(np.abs(ys - location.imag)))
    if abs(xs[i] - location.real) <= abs(ys[j] - location.imag):
        return "v", i
    return "h", j


def _perturb_line(lines: np.ndarray, index: int, shift: float) -> np.ndarray:
    lines = lines.copy()
    # boundary lines move outward, interior lines upward
    lines[index] += -shift if index == 0 else shift
    return lines


def bin_count_grid(
    cache: LengthCache,
    rect: Rect,
    nx: int,
    ny: int,
    config: SamplingConfig = DEFAULT_SAMPLING_CONFIG,
    logger: Optional[Logger] = None,
) -> BinGrid:
    """
    Zero counts of an nx by ny grid of bins over `rect`.

    Z is evaluated once at every grid vertex and once at every interior sample of
    every grid edge; each edge's change of arg is shared by the two bins it borders.
    Bins whose winding sum is far from an integer, or negative, are recounted with
    finer sampling.

    Args:
        cache (LengthCache): Length cache
        rect (Rect): Region
        nx (int): Bins along Re s
        ny (int): Bins along Im s
        config (SamplingConfig): Sampling settings
        logger (Logger, optional): Receives a CSV trace of the line progress

    Returns:
        BinGrid: Counts, residuals and the boundary total.

    Raises:
        FloorViolationError: If the rectangle reaches below the evaluation floor.
        BoundaryZeroError: If perturbing grid lines does not clear a zero on the path.
    """
    if nx < 1 or ny < 1:
        raise InvalidParametersError(f"Bin counts must be positive, got {nx}x{ny}")
    check_floor(rect, config)

    xs = np.linspace(rect.re_min, rect.re_max, nx + 1)
    ys = np.linspace(rect.im_min, rect.im_max, ny + 1)
    dx, dy = rect.width / nx, rect.height / ny

    for attempt in range(config.retries + 1):
        try:
            H, V = _grid_pass(cache, xs, ys, config, logger)
            break
        except OnPathZeroError as error:
            if attempt == config.retries:
                raise BoundaryZeroError(
                    f"{rect!r}: zero on a grid line near {error.location}",
                    location=error.location,
                ) from error
            kind, index = _nearest_line(xs, ys, error.location)
            factor = config.perturbation * 10.0 ** -(attempt + 1)
            if kind == "v":
                xs = _perturb_line(xs, index, factor * dx)
            else:
                ys = _perturb_line(ys, index, factor * dy)
            log.info(
                f"[ZEROS] Zero on grid line {kind}{index} near {error.location}, shifted"
            )

    # bottom + right - top - left, per bin
    windings = (H[:-1, :].T + V[1:, :] - H[1:, :].T - V[:-1, :]) / (2 * math.pi)
    counts = np.rint(windings).astype(np.int64)
    residuals = np.abs(windings - counts)

    outer = (H[0].sum() + V[nx].sum() - H[ny].sum() - V[0].sum()) / (2 * math.pi)
    total = int(round(outer))

    grid = BinGrid(
        rect=Rect(float(xs[0]), float(xs[-1]), float(ys[0]), float(ys[-1])),
        nx=nx,
        ny=ny,
        counts=counts,
        residuals=residuals,
        xs=xs,
        ys=ys,
        total=total,
    )

    suspicious = np.argwhere((residuals > config.residual_limit) | (counts < 0))
    for i, j in suspicious:
        count, residual = rect_winding(
            cache, grid.bin_rect(int(i), int(j)), config.finer()
        )
        grid.counts[i, j] = count
        grid.residuals[i, j] = residual
        grid.resampled.append((int(i), int(j)))
    if len(suspicious):
        log.info(f"[ZEROS] Recounted {len(suspicious)} bin(s) with finer sampling")

    if not grid.consistent:
        log.warning(
            f"[ZEROS] {grid!r}: bin counts sum to {int(grid.counts.sum())}, boundary gives {total}"
        )
    return grid


def refine_zero(
    cache: LengthCache,
    seed: complex,
    config: RefineConfig = DEFAULT_REFINE_CONFIG,
    sampling: SamplingConfig = DEFAULT_SAMPLING_CONFIG,
    bin_width: Optional[float] = None,
    bin: Optional[tuple[int, int]] = None,
) -> Resonance:
    """
    Newton iteration s <- s - Z(s)/Z'(s) from `seed`, followed by a verification winding
    around the result that fixes the multiplicity.

    Args:
        cache (LengthCache): Length cache
        seed (complex): Starting point, typically a bin center
        config (RefineConfig): Iteration settings
        sampling (SamplingConfig): Settings for the evaluations and the verification winding
        bin_width (float, optional): Size of the originating bin; the iterate must stay
            within `guard_widths` of it. Defaults to `sampling.min_spacing`.
        bin (tuple[int, int], optional): Originating bin index, stored on the result

    Returns:
        Resonance: The refined zero.

    Raises:
        NoConvergenceError: On iteration limit, guard box exit, a vanishing derivative,
            or a verification winding without zeros.
    """
    seed = complex(seed)
    guard = config.guard_widths * (
        bin_width if bin_width is not None else sampling.min_spacing
    )
    s, step = seed, 0.0
    evaluation = zeta_eval(cache, s, with_deriv=True, config=sampling.zeta)

    for iteration in range(config.max_iter + 1):
        if abs(evaluation.value) < config.tol:
            break
        if iteration == config.max_iter:
            raise NoConvergenceError(
                f"Newton from {seed} did not converge in {config.max_iter} steps",
                seed=seed,
            )
        if evaluation.derivative == 0:
            raise NoConvergenceError(f"Z' vanishes at {s}", seed=seed)

        newton = evaluation.value / evaluation.derivative
        s, step = s - newton, abs(newton)
        if max(abs(s.real - seed.real), abs(s.imag - seed.imag)) > guard:
            raise NoConvergenceError(
                f"Newton from {seed} left the guard box at {s}", seed=seed
            )
        evaluation = zeta_eval(cache, s, with_deriv=True, config=sampling.zeta)
        if step < config.step_tol:
            break

    radius = max(config.min_radius, 2.0 * step)
    count, _ = rect_winding(cache, Rect.around(s, radius), sampling)
    if count < 1:
        raise NoConvergenceError(
            f"No zero inside the verification rectangle around {s}", seed=seed
        )

    return Resonance(
        position=s, multiplicity=count, residual=abs(evaluation.value), bin=bin
    )


def _refine_or_fallback(
    cache: LengthCache,
    grid: BinGrid,
    cell: tuple[int, int],
    config: RefineConfig,
    sampling: SamplingConfig,
) -> Resonance:
    bin_rect = grid.bin_rect(*cell)
    width = max(bin_rect.width, bin_rect.height)
    try:
        return refine_zero(
            cache, bin_rect.center, config, sampling, bin_width=width, bin=cell
        )
    except SchottkyZetaError as error:
        log.warning(f"[ZEROS] Bin {cell} not refined: {error}")
        value = zeta_eval(cache, bin_rect.center, config=sampling.zeta).value
        return Resonance(
            position=bin_rect.center,
            multiplicity=int(grid.counts[cell]),
            residual=abs(value),
            bin=cell,
            refined=False,
        )


def _reseed_short_bins(
    cache: LengthCache,
    grid: BinGrid,
    found: list[Resonance],
    pixel: float,
    config: RefineConfig,
    sampling: SamplingConfig,
) -> list[Resonance]:
    """
    Refines again from the quadrant centers of every bin whose count exceeds the
    multiplicity located inside it, keeping new zeros that lie in the bin.
    """
    located = np.zeros_like(grid.counts)
    for res in found:
        cell = grid.cell_of(res.position)
        if cell is not None:
            located[cell] += res.multiplicity

    extra: list[Resonance] = []
    for cell in grid.positive_bins():
        missing = int(grid.counts[cell] - located[cell])
        if missing <= 0:
            continue
        bin_rect = grid.bin_rect(*cell)
        width = max(bin_rect.width, bin_rect.height)
        log.info(
            f"[ZEROS] Bin {cell} holds {missing} zero(s) more than located, reseeding"
        )
        for quadrant in bin_rect.quadrants():
            if missing <= 0:
                break
            try:
                res = refine_zero(
                    cache, quadrant.center, config, sampling, bin_width=width, bin=cell
                )
            except SchottkyZetaError as error:
                log.debug(
                    f"[ZEROS] Reseed of bin {cell} from {quadrant.center} failed: {error}"
                )
                continue
            if not bin_rect.contains(res.position):
                continue
            if any(
                abs(res.position - other.position) < pixel / 2
                for other in [*found, *extra]
            ):
                continue
            extra.append(res)
            missing -= res.multiplicity
        if missing > 0:
            log.warning(
                f"[ZEROS] Bin {cell}: {missing} zero(s) not located after reseeding"
            )
    return extra


def locate_all(
    cache: LengthCache,
    rect: Rect,
    pixel: float,
    config: SamplingConfig = DEFAULT_SAMPLING_CONFIG,
    refine: RefineConfig = DEFAULT_REFINE_CONFIG,
    logger: Optional[Logger] = None,
) -> ResonanceList:
    """
    Counts zeros on a grid of bins about `pixel` in size and refines one zero per bin
    with a positive count, seeded at the bin center.

    Refined positions closer than pixel / 2 are merged into one entry whose multiplicity
    comes from a verification winding; merged entries are flagged. Bins whose count still
    exceeds the multiplicity located inside them are refined again from their quadrant
    centers. Bins whose refinement fails are reported with refined=False and their bin
    count as multiplicity.

    Args:
        cache (LengthCache): Length cache
        rect (Rect): Region
        pixel (float): Target bin size
        config (SamplingConfig): Sampling settings
        refine (RefineConfig): Newton settings
        logger (Logger, optional): Receives a CSV trace of the grid pass

    Returns:
        ResonanceList: Resonances sorted by Im then Re, covering `rect`.
    """
    if not pixel > 0:
        raise InvalidParametersError(f"Pixel size must be positive, got {pixel}")

    nx = max(1, math.ceil(rect.width / pixel - 1e-9))
    ny = max(1, math.ceil(rect.height / pixel - 1e-9))
    grid = bin_count_grid(cache, rect, nx, ny, config, logger)
    cells = grid.positive_bins()
    log.info(f"[ZEROS] {grid!r}: refining {len(cells)} bin(s)")

    found = ordered_map(
        lambda cell: _refine_or_fallback(cache, grid, cell, refine, config),
        cells,
        config.threads,
    )
    found.sort(key=lambda res: (res.position.imag, res.position.real))

    merged: list[Resonance] = []
    for res in found:
        twin = next(
            (
                index
                for index, kept in enumerate(merged)
                if kept.refined
                and res.refined
                and abs(kept.position - res.position) < pixel / 2
            ),
            None,
        )
        if twin is None:
            merged.append(res)
            continue
        kept = merged[twin]
        count, _ = rect_winding(cache, Rect.around(kept.position, pixel / 2), config)
        merged[twin] = replace(
            kept, multiplicity=max(count, kept.multiplicity), merged=True
        )
        log.warning(
            f"[ZEROS] Merged refinements from bins {kept.bin} and {res.bin} at {kept.position}"
        )

    merged.extend(_reseed_short_bins(cache, grid, merged, pixel, refine, config))
    merged.sort(key=lambda res: (res.position.imag, res.position.real))

    total = sum(res.multiplicity for res in merged)
    if total != grid.total:
        log.warning(
            f"[ZEROS] Located multiplicity {total} differs from the boundary count {grid.total}"
        )

    return ResonanceList(
        resonances=merged,
        coverage=rect,
        metadata={"pixel": pixel, "nx": nx, "ny": ny, "grid_total": grid.total},
    )


def write_resonances(
    path: Union[str, Path],
    resonances: Union[ResonanceList, Sequence[Resonance]],
    manifest: Optional[dict[str, Any]] = None,
) -> None:
    """
    Writes the resonance CSV: an optional ``# manifest {json}`` line, the header
    ``re,im,multiplicity,residual`` and one row per resonance, sorted by Im then Re.
    """
    items = list(resonances)
    items.sort(key=lambda res: (res.position.imag, res.position.real))
    with open(path, "w", newline="") as handle:
        if manifest is not None:
            handle.write(MANIFEST_PREFIX + json.dumps(manifest, sort_keys=True) + "\n")
        writer = csv.writer(handle)
        writer.writerow(RESONANCE_COLUMNS)
        for res in items:
            writer.writerow(
                [
                    f"{res.position.real:.15g}",
                    f"{res.position.imag:.15g}",
                    res.multiplicity,
                    f"{res.residual:.3e}",
                ]
            )


def read_resonances(path: Union[str, Path]) -> ResonanceList:
    """
    Reads a resonance CSV. The coverage rectangle comes from the ``rect`` entry of the
    manifest line, when present.
    """
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as error:
        raise CacheFormatError(f"Cannot read resonance list {path}: {error}") from None

    metadata: dict[str, Any] = {}
    while lines and lines[0].startswith("#"):
        line = lines.pop(0)
        if line.startswith(MANIFEST_PREFIX):
            metadata = json.loads(line[len(MANIFEST_PREFIX) :])

    rows = list(csv.reader(lines))
    if not rows or rows[0] != RESONANCE_COLUMNS:
        raise CacheFormatError(f"{path}: expected header {','.join(RESONANCE_COLUMNS)}")

    resonances = []
    for row in rows[1:]:
        if not row:
            continue
        try:
            resonances.append(
                Resonance(
                    position=complex(float(row[0]), float(row[1])),
                    multiplicity=int(row[2]),
                    residual=float(row[3]),
                )
            )
        except (ValueError, IndexError):
            raise CacheFormatError(f"{path}: malformed row {row}") from None

    rect = metadata.get("rect")
    coverage = Rect(*rect) if rect is not None else None
    return ResonanceList(resonances=resonances, coverage=coverage, metadata=metadata)
