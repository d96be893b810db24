from typing import Any, Iterable, Optional, Union

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from ..geometry.words import LengthCache
from ..tools.exceptions import (
    CacheFormatError,
    ElementaryOrOutOfRangeError,
    IncompleteDataError,
    InsufficientDataError,
    InvalidParametersError,
    NoConvergenceError,
)
from ..tools.safety import SafetyDecorators
from .zeros import MANIFEST_PREFIX, Rect, Resonance, ResonanceList
from .zeta import DEFAULT_ZETA_CONFIG, ZetaConfig, zeta_eval, zeta_values

"""
Module Overview:

Statistics of computed resonance sets: the exponent of convergence delta, strip and
window counting functions, the envelope of real parts, histograms and density grids
of decay rates, power-law fits of counting functions, and the escape rate.

Only the upper half plane is ever computed. Counts over |Im| <= t weight every
resonance off the real axis twice and every real resonance once.

Key Classes:

- `DeltaConfig`: Scan and polish settings for `compute_delta`.
- `CountSeries`: Counting function sampled at a list of t values.
- `EnvelopeSeries`: Windowed maximum of real parts, NaN where a window is empty.
- `Histogram`, `DensityGrid`: Multiplicity weighted 1D and 2D binnings.
- `WeylFit`, `GapReport`, `LocalizedSeries`: Results of the fits and summaries.

Usage Guide:

1. Compute delta from a length cache with `compute_delta(cache)`.
2. Load a resonance list with `schottkyzeta.spectral.zeros.read_resonances`.
3. Build series with `counting_strip`, `windowed_count` or `envelope`.
4. Fit exponents with `weyl_fit`, write results with `write_columns`.
"""

log = logging.getLogger(__name__)

AXIS_TOLERANCE: float = 1e-9

Resonances = Union[ResonanceList, Iterable[Resonance]]


@dataclass
class DeltaConfig:
    """
    Settings of the delta search.

    Args:
        start (float): Upper end of the downward scan. Defaults to 1.0.
        step (float): Scan step. Defaults to 0.01.
        xtol (float): Root tolerance of the bracketed search. Defaults to 1e-15.
        tol (float): Target |Z(delta)| of the Newton polish. Defaults to 1e-12.
        min_nmax (int): Smallest cache N_max accepted. Defaults to 8.
        max_iter (int): Iteration limit of the root search and of the polish. Defaults to 100.
    """

    start: float = 1.0
    step: float = 0.01
    xtol: float = 1e-15
    tol: float = 1e-12
    min_nmax: int = 8
    max_iter: int = 100

    def __post_init__(self) -> None:
        self.checked_start

    @property
    @SafetyDecorators.is_within_range(0.0, 1.0, error=InvalidParametersError)
    def checked_start(self) -> float:
        return self.start


DEFAULT_DELTA_CONFIG = DeltaConfig()


@dataclass(frozen=True)
class CountSeries:
    t_values: np.ndarray
    counts: np.ndarray
    strip: tuple[float, float]
    window: Optional[float] = None

    def __repr__(self) -> str:
        return f"CountSeries[{self.strip}, {len(self.t_values)} points]"


@dataclass(frozen=True)
class EnvelopeSeries:
    t_values: np.ndarray
    h_values: np.ndarray
    window: float

    def __repr__(self) -> str:
        return f"EnvelopeSeries[w={self.window}, {len(self.t_values)} points]"


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    weights: np.ndarray

    def __repr__(self) -> str:
        return f"Histogram[{len(self.weights)} bins]"

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def mode_bin(self) -> tuple[float, float]:
        index = int(np.argmax(self.weights))
        return float(self.edges[index]), float(self.edges[index + 1])


@dataclass(frozen=True)
class DensityGrid:
    """
    Multiplicity weighted resonance counts per cell; weights[i, j] covers the i-th
    Re interval and the j-th Im interval.
    """

    rect: Rect
    nx: int
    ny: int
    weights: np.ndarray

    def __repr__(self) -> str:
        return f"DensityGrid[{self.nx}x{self.ny}]"

    def to_pgm(self) -> str:
        """
        Plain PGM (P2) image, Re along the columns and Im increasing upward.
        """
        pixels = np.rint(self.weights.T[::-1]).astype(np.int64)
        maxval = max(1, int(pixels.max()) if pixels.size else 1)
        lines = ["P2", f"{self.nx} {self.ny}", str(maxval)]
        lines.extend(" ".join(str(int(value)) for value in row) for row in pixels)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class WeylFit:
    exponent: float
    prefactor: float
    rms: float
    samples: int

    def __repr__(self) -> str:
        return f"WeylFit[exponent={self.exponent:.4f}]"


@dataclass(frozen=True)
class GapReport:
    """
    Observed gap between delta and every other computed resonance.

    Args:
        gap (float): delta minus the largest other real part; inf when there is none
        first (Resonance, optional): Resonance at delta, when present in the list
        runner_up (Resonance, optional): Rightmost of the other resonances
        im_max (float): Upper end of the examined Im range
    """

    gap: float
    first: Optional[Resonance]
    runner_up: Optional[Resonance]
    im_max: float

    def __repr__(self) -> str:
        return f"GapReport[gap={self.gap:.6g}]"


@dataclass(frozen=True)
class LocalizedSeries:
    t_values: np.ndarray
    increments: np.ndarray
    ratios: np.ndarray

    def __repr__(self) -> str:
        return f"LocalizedSeries[{len(self.t_values)} points]"


def compute_delta(
    cache: LengthCache,
    config: DeltaConfig = DEFAULT_DELTA_CONFIG,
    zeta: ZetaConfig = DEFAULT_ZETA_CONFIG,
) -> float:
    """
    Largest real zero of the zeta function, the exponent of convergence delta.

    Z is scanned on the real axis from `start` downward; the first sign change is
    solved with Brent's method and the result polished by Newton iteration.

    Args:
        cache (LengthCache): Length cache with N_max >= `config.min_nmax`
        config (DeltaConfig): Scan settings
        zeta (ZetaConfig): Truncation policy

    Returns:
        float: delta.

    Raises:
        InvalidParametersError: If the cache is too short.
        ElementaryOrOutOfRangeError: If Z has no sign change on the scanned range.
        NoConvergenceError: If the root search does not converge.
    """
    if cache.n_max < config.min_nmax:
        raise InvalidParametersError(
            f"compute_delta needs N_max >= {config.min_nmax}, cache has {cache.n_max}"
        )

    steps = int(math.floor(config.start / config.step + 1e-9))
    grid = config.start - config.step * np.arange(steps)
    grid = grid[grid > 0]
    values = zeta_values(cache, grid, config=zeta).values.real

    signs = np.sign(values)
    changes = np.nonzero(signs[:-1] * signs[1:] <= 0)[0]
    if len(changes) == 0:
        raise ElementaryOrOutOfRangeError(
            f"{cache!r}: no sign change of Z on ({grid[-1]:g}, {config.start:g}]"
        )

    k = int(changes[0])
    high, low = float(grid[k]), float(grid[k + 1])
    if values[k + 1] == 0.0:
        return low

    def real_zeta(sigma: float) -> float:
        return float(zeta_eval(cache, sigma, config=zeta).value.real)

    delta, result = brentq(
        real_zeta,
        low,
        high,
        xtol=config.xtol,
        maxiter=config.max_iter,
        full_output=True,
        disp=False,
    )
    if not result.converged:
        raise NoConvergenceError(
            f"{cache!r}: root search on [{low:g}, {high:g}] stopped after {result.iterations} iterations",
            bracket=(low, high),
        )

    for _ in range(config.max_iter):
        evaluation = zeta_eval(cache, delta, with_deriv=True, config=zeta)
        if abs(evaluation.value) < config.tol or evaluation.derivative == 0:
            break
        step = (evaluation.value / evaluation.derivative).real
        if not low <= delta - step <= high:
            break
        delta -= step
        if abs(step) < 1e-16:
            break

    log.info(f"[CENSUS] {cache!r}: delta = {delta:.12f}")
    return float(delta)


def _items(res: Resonances) -> tuple[list[Resonance], Optional[Rect]]:
    if isinstance(res, ResonanceList):
        return res.resonances, res.coverage
    return list(res), None


def _arrays(items: list[Resonance]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    positions = np.array([item.position for item in items], dtype=complex)
    multiplicities = np.array([item.multiplicity for item in items], dtype=np.int64)
    return positions.real.copy(), positions.imag.copy(), multiplicities


def _require_coverage(
    coverage: Optional[Rect],
    re_range: Optional[tuple[float, float]],
    im_top: float,
) -> None:
    if coverage is None:
        return
    problems = []
    if re_range is not None and (
        re_range[0] < coverage.re_min or re_range[1] > coverage.re_max
    ):
        problems.append(f"Re range {re_range}")
    if coverage.im_min > 0.0:
        problems.append("Im = 0")
    if im_top > coverage.im_max:
        problems.append(f"Im up to {im_top:g}")
    if problems:
        raise IncompleteDataError(
            f"Query needs {', '.join(problems)} but the list covers {coverage!r}",
            coverage=coverage.as_tuple(),
        )


def _symmetric_weights(im: np.ndarray, multiplicities: np.ndarray) -> np.ndarray:
    # Im > 0 stands for itself and its conjugate; Im < 0 is not part of the data
    on_axis = np.abs(im) < AXIS_TOLERANCE
    weights = np.where(on_axis, multiplicities, 2 * multiplicities)
    return np.where(im < -AXIS_TOLERANCE, 0, weights)


def counting_strip(
    res: Resonances, a0: float, a1: float, t_values: Iterable[float]
) -> CountSeries:
    """
    N(a0, a1; t), the number of resonances with a0 <= Re < a1 and |Im| <= t, counted with
    multiplicity.

    Args:
        res (ResonanceList or Iterable[Resonance]): Upper half plane resonances
        a0 (float): Lower strip bound, inclusive
        a1 (float): Upper strip bound, exclusive
        t_values (Iterable[float]): Heights

    Returns:
        CountSeries: Counts per height.

    Raises:
        IncompleteDataError: If the list's coverage misses part of the query.
    """
    t_values = np.asarray(list(t_values), dtype=float)
    items, coverage = _items(res)
    _require_coverage(
        coverage, (a0, a1), float(t_values.max()) if t_values.size else 0.0
    )

    if not items:
        return CountSeries(t_values, np.zeros(len(t_values), dtype=np.int64), (a0, a1))

    re, im, multiplicities = _arrays(items)
    weights = _symmetric_weights(im, multiplicities)
    inside = (re >= a0) & (re < a1) & (weights > 0)

    heights = np.abs(im[inside])
    order = np.argsort(heights, kind="stable")
    cumulative = np.concatenate([[0], np.cumsum(weights[inside][order])])
    counts = cumulative[np.searchsorted(heights[order], t_values, side="right")]
    return CountSeries(t_values, counts.astype(np.int64), (a0, a1))


def windowed_count(
    res: Resonances, half_width: float, t_values: Iterable[float]
) -> CountSeries:
    """
    #{zeta : Re zeta > 0, |Im zeta - t| <= w}, conjugates included.
    """
    if not half_width > 0:
        raise InvalidParametersError(
            f"Window half width must be positive, got {half_width}"
        )
    t_values = np.asarray(list(t_values), dtype=float)
    items, coverage = _items(res)
    top = float(np.abs(t_values).max()) + half_width if t_values.size else 0.0
    _require_coverage(coverage, None, top)

    counts = np.zeros(len(t_values), dtype=np.int64)
    if items:
        re, im, multiplicities = _arrays(items)
        heights, weights = _mirrored(re, im, multiplicities, re > 0)
        for index, t in enumerate(t_values):
            counts[index] = int(weights[np.abs(heights - t) <= half_width].sum())
    return CountSeries(t_values, counts, (0.0, math.inf), window=half_width)


def _mirrored(
    re: np.ndarray, im: np.ndarray, multiplicities: np.ndarray, mask: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    keep = mask & (im >= -AXIS_TOLERANCE)
    off_axis = keep & (np.abs(im) >= AXIS_TOLERANCE)
    heights = np.concatenate([im[keep], -im[off_axis]])
    weights = np.concatenate([multiplicities[keep], multiplicities[off_axis]])
    return heights, weights


def envelope(res: Resonances, w: float, t_values: Iterable[float]) -> EnvelopeSeries:
    """
    h_w(t) = max{Re zeta : |Im zeta - t| <= w}, with conjugates included; NaN marks
    windows without a resonance.
    """
    if not w > 0:
        raise InvalidParametersError(f"Window half width must be positive, got {w}")
    t_values = np.asarray(list(t_values), dtype=float)
    items, coverage = _items(res)
    h_values = np.full(len(t_values), np.nan)

    if items:
        re, im, multiplicities = _arrays(items)
        keep = im >= -AXIS_TOLERANCE
        off_axis = keep & (np.abs(im) >= AXIS_TOLERANCE)
        heights = np.concatenate([im[keep], -im[off_axis]])
        parts = np.concatenate([re[keep], re[off_axis]])
        for index, t in enumerate(t_values):
            window = np.abs(heights - t) <= w
            if window.any():
                h_values[index] = parts[window].max()

    if coverage is not None:
        beyond = np.abs(t_values) + w > coverage.im_max
        if beyond.any():
            log.info(
                f"[CENSUS] {int(beyond.sum())} window(s) reach past the computed Im range"
            )
            h_values[beyond] = np.nan
    return EnvelopeSeries(t_values, h_values, w)


def real_part_histogram(
    res: Resonances,
    bins: int,
    im_range: tuple[float, float],
    re_range: Optional[tuple[float, float]] = None,
) -> Histogram:
    """
    Multiplicity weighted histogram of Re zeta over resonances with Im zeta in `im_range`.
    """
    items, _ = _items(res)
    re, im, multiplicities = _arrays(items) if items else (
        np.zeros(0), np.zeros(0), np.zeros(0)
    )
    selected = (im >= im_range[0]) & (im <= im_range[1])
    if re_range is None:
        re_range = (0.0, float(re[selected].max())) if selected.any() else (0.0, 1.0)
    weights, edges = np.histogram(
        re[selected], bins=bins, range=re_range, weights=multiplicities[selected]
    )
    return Histogram(edges=edges, weights=weights)


def density_grid(res: Resonances, rect: Rect, nx: int, ny: int) -> DensityGrid:
    """
    Multiplicity weighted 2D binning of the resonances inside `rect`.
    """
    if nx < 1 or ny < 1:
        raise InvalidParametersError(f"Grid size must be positive, got {nx}x{ny}")
    items, _ = _items(res)
    if not items:
        return DensityGrid(rect, nx, ny, np.zeros((nx, ny)))

    re, im, multiplicities = _arrays(items)
    weights, _, _ = np.histogram2d(
        re,
        im,
        bins=[nx, ny],
        range=[[rect.re_min, rect.re_max], [rect.im_min, rect.im_max]],
        weights=multiplicities,
    )
    return DensityGrid(rect, nx, ny, weights)


def weyl_fit(series: CountSeries, t_min: float, t_max: float) -> WeylFit:
    """
    Least squares fit of log N(t) = exponent * log t + log prefactor over the samples
    with t in [t_min, t_max] and a positive count.

    Raises:
        InsufficientDataError: With fewer than 5 usable samples.

    Example:
        >>> t = np.arange(10.0, 1000.0, 10.0)
        >>> fit = weyl_fit(CountSeries(t, np.floor(5 * t**1.1), (0.0, 0.1)), 10.0, 1000.0)
        >>> abs(fit.exponent - 1.1) < 1e-2
        True
    """
    t = np.asarray(series.t_values, dtype=float)
    counts = np.asarray(series.counts, dtype=float)
    usable = (t >= t_min) & (t <= t_max) & (t > 0) & (counts > 0)
    if usable.sum() < 5:
        raise InsufficientDataError(
            f"weyl_fit needs 5 positive samples in [{t_min}, {t_max}], got {int(usable.sum())}"
        )

    x, y = np.log(t[usable]), np.log(counts[usable])
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return WeylFit(
        exponent=float(slope),
        prefactor=float(math.exp(intercept)),
        rms=float(np.sqrt(np.mean(residuals**2))),
        samples=int(usable.sum()),
    )


def escape_rate(delta: float) -> float:
    """
    Classical escape rate 1 - delta.

    Example:
        >>> round(escape_rate(0.1155), 4)
        0.8845
    """
    if not 0.0 < delta < 1.0:
        raise InvalidParametersError(f"delta must lie in (0, 1), got {delta}")
    return 1.0 - delta


def gap_report(
    res: Resonances, delta: float, im_max: float, tol: float = 1e-6
) -> GapReport:
    """
    Gap between delta and the rightmost other resonance with 0 <= Im <= im_max.

    Args:
        res (ResonanceList or Iterable[Resonance]): Resonances
        delta (float): Exponent of convergence
        im_max (float): Upper end of the Im range
        tol (float): Distance below which a resonance is taken to be delta itself

    Returns:
        GapReport: Gap (inf without other resonances), the delta resonance and the runner up.
    """
    items, _ = _items(res)
    first = None
    others = []
    for item in items:
        if abs(item.position - delta) < tol:
            first = item
        elif -AXIS_TOLERANCE <= item.position.imag <= im_max:
            others.append(item)

    if not others:
        return GapReport(gap=math.inf, first=first, runner_up=None, im_max=im_max)
    runner_up = max(others, key=lambda item: (item.position.real, -item.position.imag))
    return GapReport(
        gap=delta - runner_up.position.real,
        first=first,
        runner_up=runner_up,
        im_max=im_max,
    )


def localized_increment(
    res: Resonances, a0: float, a1: float, t_values: Iterable[float], delta: float
) -> LocalizedSeries:
    """
    Unit increments N(a0, a1; t + 1) - N(a0, a1; t) and their ratio to t^delta.
    """
    t_values = np.asarray(list(t_values), dtype=float)
    upper = counting_strip(res, a0, a1, t_values + 1.0).counts
    lower = counting_strip(res, a0, a1, t_values).counts
    increments = upper - lower
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = increments / np.power(t_values, delta)
    return LocalizedSeries(t_values, increments, ratios)


def weyl_reference(
    t_values: Iterable[float], delta: float, c: float = 1.0
) -> np.ndarray:
    """
    Guide line c * t^(1 + delta).
    """
    return c * np.power(np.asarray(list(t_values), dtype=float), 1.0 + delta)


def curve_spacings(res: Resonances, re_min: float, re_max: float) -> np.ndarray:
    """
    Consecutive Im spacings of the upper half plane resonances with re_min <= Re <= re_max.
    """
    items, _ = _items(res)
    if not items:
        return np.zeros(0)
    re, im, _ = _arrays(items)
    heights = np.sort(im[(re >= re_min) & (re <= re_max) & (im >= -AXIS_TOLERANCE)])
    return np.diff(heights)


def write_columns(
    path: Union[str, Path],
    columns: dict[str, np.ndarray],
    manifest: Optional[dict[str, Any]] = None,
) -> None:
    """
    Writes equally long columns as CSV with a header row, preceded by the optional
    ``# manifest {json}`` line. Floats use 15 significant digits.
    """
    names = list(columns)
    data = [np.asarray(columns[name]) for name in names]
    if len({len(column) for column in data}) > 1:
        raise InvalidParametersError("Columns must have equal length")

    with open(path, "w", newline="") as handle:
        if manifest is not None:
            handle.write(MANIFEST_PREFIX + json.dumps(manifest, sort_keys=True) + "\n")
        writer = csv.writer(handle)
        writer.writerow(names)
        for row in zip(*data):
            writer.writerow([format_cell(value) for value in row])


def format_cell(value: Any) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.15g}"


def read_columns(path: Union[str, Path]) -> tuple[
    dict[str, np.ndarray], dict[str, Any]
]:
    """
    Reads a CSV written by `write_columns`.

    Returns:
        tuple: (columns as float arrays, manifest dict).
    """
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as error:
        raise CacheFormatError(f"Cannot read {path}: {error}") from None

    manifest: dict[str, Any] = {}
    while lines and lines[0].startswith("#"):
        line = lines.pop(0)
        if line.startswith(MANIFEST_PREFIX):
            manifest = json.loads(line[len(MANIFEST_PREFIX) :])

    rows = [row for row in csv.reader(lines) if row]
    if not rows:
        raise CacheFormatError(f"{path} has no header")
    names = rows[0]
    try:
        values = np.array(
            [[float(cell) for cell in row] for row in rows[1:]], dtype=float
        )
    except ValueError:
        raise CacheFormatError(f"{path} has non-numeric cells") from None
    values = values.reshape(-1, len(names))
    return {name: values[:, index] for index, name in enumerate(names)}, manifest
