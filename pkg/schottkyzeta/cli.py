from typing import Any, Callable, Optional

import functools
import logging
import math
import re
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .geometry.schottky import build_from_spec, format_surface_spec
from .geometry.words import (
    ClassTableConfig,
    LengthCache,
    build_class_table,
    build_length_cache,
    load_class_tables,
    save_class_tables,
)
from .spectral import census
from .spectral.zeros import (
    RefineConfig,
    Rect,
    SamplingConfig,
    bin_count_grid,
    locate_all,
    read_resonances,
    write_resonances,
)
from .spectral.zeta import ZetaConfig, error_profile, zeta_eval
from .tools.exceptions import (
    ALL_ERRORS,
    FloorViolationError,
    InvalidParametersError,
    SchottkyZetaError,
)
from .tools.logger import Logger
from .tools.svg import LinePlot

"""
Module Overview:

Command-line frontend of schottkyzeta. Every subcommand wraps one library operation,
writes its results with a leading ``# manifest {json}`` line and maps library errors
to distinct exit codes.

Usage Guide:

    schottkyzeta cache --spec X:12,13,14 --nmax 12 --out x121314.cache
    schottkyzeta eval --cache x121314.cache --s 0.1+10i
    schottkyzeta locate --cache x121314.cache --rect 0,0.11,0,40 --pixel 0.01 --out res.csv
    schottkyzeta census weyl --res res.csv --strip 0,delta --delta 0.1068 --out weyl.csv
    schottkyzeta plot --in weyl.csv --x t --y count --log-log --out weyl.svg
"""

log = logging.getLogger(__name__)


def _exit_code_table() -> str:
    rows = [f"  {error.exit_code:>3}  {error.label}" for error in ALL_ERRORS]
    return "\b\nExit codes:\n   0  success\n" + "\n".join(rows)


@dataclass
class RunManifest:
    """
    Provenance of one output file, written as its first line.

    Only the ``created`` timestamp differs between reruns; the data below the manifest
    line is byte-identical for identical manifests.
    """

    command: str
    spec: Optional[str] = None
    cache: Optional[str] = None
    n_max: Optional[int] = None
    sampling: dict[str, Any] = field(default_factory=dict)
    rect: Optional[tuple[float, float, float, float]] = None
    parameters: dict[str, Any] = field(default_factory=dict)
    version: str = __version__
    created: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def __repr__(self) -> str:
        return f"RunManifest[{self.command}]"

    @classmethod
    def for_cache(
        cls, command: str, cache_path: str, cache: LengthCache, **kwargs: Any
    ) -> "RunManifest":
        return cls(
            command=command,
            spec=format_surface_spec(cache.spec),
            cache=cache_path,
            n_max=cache.n_max,
            **kwargs,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            key: value for key, value in asdict(self).items() if value not in (None, {})
        }


@dataclass
class CliContext:
    logger: Logger
    threads: int = 1


def _sampling_dict(config: SamplingConfig) -> dict[str, Any]:
    values = asdict(config)
    values.pop("threads")
    return values


class SchottkyZetaGroup(click.Group):
    """
    Click group that turns library errors into their exit codes.
    """

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except SchottkyZetaError as error:
            click.echo(f"error ({error.label}): {error}", err=True)
            ctx.exit(error.exit_code)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise InvalidParametersError(f"Malformed complex number '{text}'") from None


def _parse_pair(text: str, kind: Callable[[str], Any] = float) -> tuple[Any, Any]:
    parts = text.split(",")
    if len(parts) != 2:
        raise InvalidParametersError(
            f"Expected two comma separated values, got '{text}'"
        )
    try:
        return kind(parts[0]), kind(parts[1])
    except ValueError:
        raise InvalidParametersError(f"Malformed pair '{text}'") from None


_DELTA_BOUND = re.compile(r"^(?P<num>[0-9.]*)\*?delta(?:/(?P<den>[0-9.]+))?$")


def parse_bound(text: str, delta: Optional[float]) -> float:
    """
    Strip bound as a decimal or as a multiple of delta (``delta``, ``delta/2``,
    ``3delta/4``).

    Example:
        >>> parse_bound("3delta/4", 0.4)
        0.30000000000000004
    """
    text = text.strip().lower()
    match = _DELTA_BOUND.match(text)
    if match is None:
        try:
            return float(text)
        except ValueError:
            raise InvalidParametersError(f"Malformed strip bound '{text}'") from None
    if delta is None:
        raise InvalidParametersError(f"Strip bound '{text}' needs --delta")
    numerator = float(match.group("num")) if match.group("num") else 1.0
    denominator = float(match.group("den")) if match.group("den") else 1.0
    return numerator * delta / denominator


def _t_values(t_min: float, t_max: float, t_step: float) -> np.ndarray:
    if not (t_step > 0 and t_max >= t_min):
        raise InvalidParametersError(f"Bad t range {t_min}:{t_max}:{t_step}")
    count = int(math.floor((t_max - t_min) / t_step + 1e-9)) + 1
    return t_min + t_step * np.arange(count)


def _load_cache(path: str) -> LengthCache:
    cache = LengthCache.load(path)
    log.debug(f"[CLI] Loaded {cache!r} from {path}")
    return cache


def sampling_options(command: Callable) -> Callable:
    """
    Adds the argument-principle sampling flags to a command.
    """
    options = [
        click.option(
            "--min-spacing",
            type=float,
            default=0.01,
            show_default=True,
            help="Initial edge sample spacing.",
        ),
        click.option(
            "--min-samples",
            type=int,
            default=8,
            show_default=True,
            help="Fewest intervals per edge.",
        ),
        click.option(
            "--max-depth",
            type=int,
            default=12,
            show_default=True,
            help="Bisection depth limit.",
        ),
        click.option(
            "--tol",
            type=float,
            default=1e-9,
            show_default=True,
            help="Adaptive truncation tolerance.",
        ),
        click.option(
            "--N", "truncation", type=int, default=None, help="Fixed truncation order."
        ),
        click.option(
            "--floor",
            type=float,
            default=-0.5,
            show_default=True,
            help="Lowest allowed Re s.",
        ),
    ]
    for option in reversed(options):
        command = option(command)

    @functools.wraps(command)
    def wrapper(
        *args: Any,
        min_spacing,
        min_samples,
        max_depth,
        tol,
        truncation,
        floor,
        **kwargs: Any,
    ):
        context = click.get_current_context().find_object(CliContext)
        sampling = SamplingConfig(
            min_spacing=min_spacing,
            min_samples=min_samples,
            max_depth=max_depth,
            threads=context.threads if context else 1,
            zeta=ZetaConfig(truncation=truncation, tol=tol, floor=floor),
        )
        return command(*args, sampling=sampling, **kwargs)

    return wrapper


@click.group(cls=SchottkyZetaGroup, epilog=_exit_code_table())
@click.version_option(__version__, prog_name="schottkyzeta")
@click.option(
    "--log",
    "log_path",
    type=str,
    default=None,
    help="Write <LOG>.log and a <LOG>.csv progress trace.",
)
@click.option(
    "--threads",
    type=int,
    default=1,
    show_default=True,
    help="Worker threads; output is identical for any value.",
)
@click.option(
    "-v", "--verbose", is_flag=True, help="Show debug messages on the console."
)
@click.pass_context
def main(
    ctx: click.Context, log_path: Optional[str], threads: int, verbose: bool
) -> None:
    """
    Resonances of Schottky surfaces as zeros of the Selberg zeta function.
    """
    if threads < 1:
        raise InvalidParametersError(f"--threads must be at least 1, got {threads}")
    logger = Logger(file_path=log_path)
    if verbose:
        logger.set_stream_level("DEBUG")
    ctx.call_on_close(logger.close)
    ctx.obj = CliContext(logger=logger, threads=threads)


@main.command("cache")
@click.option("--spec", required=True, help="Surface, e.g. X:12,13,14 or Y:12,12,pi/2.")
@click.option(
    "--nmax", type=int, default=12, show_default=True, help="Largest word length."
)
@click.option(
    "--out", required=True, type=click.Path(dir_okay=False), help="Cache file."
)
@click.option(
    "--tables",
    "tables_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Prebuilt class tables.",
)
@click.option(
    "--save-tables",
    type=click.Path(dir_okay=False),
    default=None,
    help="Also write the class tables.",
)
@click.option(
    "--trials",
    type=int,
    default=3,
    show_default=True,
    help="Random draws per class table.",
)
@click.option(
    "--class-tol",
    type=float,
    default=1e-9,
    show_default=True,
    help="Relative length matching tolerance.",
)
@click.option(
    "--seed", type=int, default=20130519, show_default=True, help="Seed of the draws."
)
def cache_command(
    spec: str,
    nmax: int,
    out: str,
    tables_path: Optional[str],
    save_tables: Optional[str],
    trials: int,
    class_tol: float,
    seed: int,
) -> None:
    """
    Builds the length cache of a surface.
    """
    group = build_from_spec(spec)
    config = ClassTableConfig(trials=trials, tol=class_tol, seed=seed)

    tables = load_class_tables(tables_path) if tables_path else {}
    for n in range(1, nmax + 1):
        if n not in tables:
            tables[n] = build_class_table(group.r, n, config=config)

    cache = build_length_cache(group, nmax, config=config, tables=tables)
    cache.save(out)
    if save_tables:
        save_class_tables([tables[n] for n in range(1, nmax + 1)], save_tables)

    for n in range(1, nmax + 1):
        entry = cache.entry(n)
        click.echo(f"n={n:<3d} classes={len(entry.lengths):<8d} words={entry.total}")


@main.command("eval")
@click.option(
    "--cache", "cache_path", required=True, type=click.Path(exists=True, dir_okay=False)
)
@click.option("--s", "point", default=None, help="Evaluation point, e.g. 0.1+10i.")
@click.option(
    "--N", "truncation", type=int, default=None, help="Fixed truncation order."
)
@click.option(
    "--tol",
    type=float,
    default=1e-9,
    show_default=True,
    help="Adaptive truncation tolerance.",
)
@click.option("--deriv", is_flag=True, help="Also print Z'(s).")
@click.option(
    "--floor", type=float, default=-0.5, show_default=True, help="Lowest allowed Re s."
)
@click.option("--force", is_flag=True, help="Evaluate below the floor.")
@click.option(
    "--profile",
    default=None,
    help="Error indicator along a segment: p,q,count (p and q complex).",
)
@click.option(
    "--out", type=click.Path(dir_okay=False), default=None, help="CSV for --profile."
)
def eval_command(
    cache_path: str,
    point: Optional[str],
    truncation: Optional[int],
    tol: float,
    deriv: bool,
    floor: float,
    force: bool,
    profile: Optional[str],
    out: Optional[str],
) -> None:
    """
    Evaluates Z at one point, or its error indicator along a segment.
    """
    cache = _load_cache(cache_path)
    config = ZetaConfig(truncation=truncation, tol=tol, floor=floor)

    if profile is not None:
        _eval_profile(cache, cache_path, profile, truncation, floor, force, out)
        return
    if point is None:
        raise InvalidParametersError("eval needs --s or --profile")

    s = _parse_complex(point)
    if s.real < floor and not force:
        raise FloorViolationError(
            f"Re s = {s.real} is below the floor {floor}; use --force", floor=floor
        )

    evaluation = zeta_eval(cache, s, with_deriv=deriv, config=config)
    click.echo(f"s       = {_format_complex(evaluation.s)}")
    click.echo(f"Z(s)    = {_format_complex(evaluation.value)}")
    if deriv:
        click.echo(f"Z'(s)   = {_format_complex(evaluation.derivative)}")
    click.echo(f"N       = {evaluation.N}")
    click.echo(f"rel_err = {evaluation.rel_err:.3e}")
    if evaluation.capped:
        click.echo("warning: truncation order capped by the cache", err=True)
    if evaluation.overflow:
        click.echo("warning: value overflowed", err=True)


def _format_complex(value: Optional[complex]) -> str:
    if value is None:
        return "-"
    if value.imag == 0.0:
        return f"{value.real:.15g}"
    return f"{value.real:.15g}{value.imag:+.15g}i"


def _eval_profile(
    cache: LengthCache,
    cache_path: str,
    profile: str,
    truncation: Optional[int],
    floor: float,
    force: bool,
    out: Optional[str],
) -> None:
    parts = profile.split(",")
    if len(parts) != 3:
        raise InvalidParametersError(f"--profile needs p,q,count, got '{profile}'")
    p, q = _parse_complex(parts[0]), _parse_complex(parts[1])
    count = int(parts[2])
    if count < 2:
        raise InvalidParametersError("--profile needs at least 2 points")
    if min(p.real, q.real) < floor and not force:
        raise FloorViolationError(
            f"Profile reaches below the floor {floor}; use --force", floor=floor
        )

    order = truncation if truncation is not None else cache.n_max
    points = p + (q - p) * np.linspace(0.0, 1.0, count)
    rel_err = error_profile(cache, points, order)

    if out is None:
        for z, value in zip(points, rel_err):
            click.echo(f"{_format_complex(complex(z))} {value:.3e}")
        return
    manifest = RunManifest.for_cache(
        "eval --profile", cache_path, cache, parameters={"profile": profile, "N": order}
    )
    census.write_columns(
        out,
        {"re": points.real, "im": points.imag, "rel_err": rel_err},
        manifest.to_dict(),
    )


@main.command("count")
@click.option(
    "--cache", "cache_path", required=True, type=click.Path(exists=True, dir_okay=False)
)
@click.option("--rect", required=True, help="re0,re1,im0,im1")
@click.option("--bins", default="1,1", show_default=True, help="nx,ny")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Bin CSV.")
@sampling_options
def count_command(
    cache_path: str, rect: str, bins: str, out: Optional[str], sampling: SamplingConfig
) -> None:
    """
    Counts the zeros of Z in every bin of a rectangle.
    """
    cache = _load_cache(cache_path)
    region = Rect.parse(rect)
    nx, ny = _parse_pair(bins, int)
    context = click.get_current_context().find_object(CliContext)

    grid = bin_count_grid(cache, region, nx, ny, sampling, context.logger)
    click.echo(
        f"total={grid.total} bins={int(grid.counts.sum())} resampled={len(grid.resampled)}"
    )
    if not grid.consistent:
        click.echo("warning: bin counts do not add up to the boundary count", err=True)
    if out is None:
        return

    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    i, j = i.reshape(-1), j.reshape(-1)
    columns = {
        "i": i,
        "j": j,
        "re_min": grid.xs[i],
        "re_max": grid.xs[i + 1],
        "im_min": grid.ys[j],
        "im_max": grid.ys[j + 1],
        "count": grid.counts.reshape(-1),
        "residual": grid.residuals.reshape(-1),
    }
    manifest = RunManifest.for_cache(
        "count",
        cache_path,
        cache,
        sampling=_sampling_dict(sampling),
        rect=region.as_tuple(),
        parameters={"bins": [nx, ny], "total": grid.total},
    )
    census.write_columns(out, columns, manifest.to_dict())


@main.command("locate")
@click.option(
    "--cache", "cache_path", required=True, type=click.Path(exists=True, dir_okay=False)
)
@click.option("--rect", required=True, help="re0,re1,im0,im1")
@click.option(
    "--pixel", type=float, default=0.01, show_default=True, help="Target bin size."
)
@click.option(
    "--refine-tol",
    type=float,
    default=1e-10,
    show_default=True,
    help="Target |Z| of a refined zero.",
)
@click.option(
    "--out", required=True, type=click.Path(dir_okay=False), help="Resonance CSV."
)
@sampling_options
def locate_command(
    cache_path: str,
    rect: str,
    pixel: float,
    refine_tol: float,
    out: str,
    sampling: SamplingConfig,
) -> None:
    """
    Locates and refines every zero of Z inside a rectangle.
    """
    cache = _load_cache(cache_path)
    region = Rect.parse(rect)
    context = click.get_current_context().find_object(CliContext)

    resonances = locate_all(
        cache, region, pixel, sampling, RefineConfig(tol=refine_tol), context.logger
    )
    manifest = RunManifest.for_cache(
        "locate",
        cache_path,
        cache,
        sampling=_sampling_dict(sampling),
        rect=region.as_tuple(),
        parameters={
            "pixel": pixel,
            "refine_tol": refine_tol,
            "grid_total": resonances.metadata["grid_total"],
        },
    )
    write_resonances(out, resonances, manifest.to_dict())

    unrefined = sum(not res.refined for res in resonances)
    click.echo(
        f"resonances={len(resonances)} multiplicity={int(resonances.multiplicities().sum())} unrefined={unrefined}"
    )


@main.group("census", cls=SchottkyZetaGroup)
def census_group() -> None:
    """
    Statistics of resonance lists.
    """


def _census_manifest(
    command: str, res_path: str, resonances, **parameters: Any
) -> dict[str, Any]:
    source = resonances.metadata
    rect = resonances.coverage.as_tuple() if resonances.coverage is not None else None
    manifest = RunManifest(
        command=f"census {command}",
        spec=source.get("spec"),
        cache=source.get("cache"),
        n_max=source.get("n_max"),
        sampling=source.get("sampling", {}),
        rect=rect,
        parameters={"resonances": res_path, **parameters},
    )
    return manifest.to_dict()


def _write_or_echo(
    out: Optional[str], columns: dict[str, np.ndarray], manifest: dict[str, Any]
) -> None:
    if out is not None:
        census.write_columns(out, columns, manifest)
        return
    names = list(columns)
    click.echo(",".join(names))
    for row in zip(*(columns[name] for name in names)):
        click.echo(",".join(census.format_cell(value) for value in row))


def t_range_options(command: Callable) -> Callable:
    options = [
        click.option("--t-min", type=float, default=0.0, show_default=True),
        click.option("--t-max", type=float, required=True),
        click.option("--t-step", type=float, default=1.0, show_default=True),
    ]
    for option in reversed(options):
        command = option(command)
    return command


res_option = click.option(
    "--res",
    "res_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Resonance CSV.",
)
out_option = click.option(
    "--out", type=click.Path(dir_okay=False), default=None, help="Output CSV."
)


@census_group.command("delta")
@click.option(
    "--cache", "cache_path", required=True, type=click.Path(exists=True, dir_okay=False)
)
@click.option(
    "--tol",
    type=float,
    default=1e-9,
    show_default=True,
    help="Adaptive truncation tolerance.",
)
def delta_command(cache_path: str, tol: float) -> None:
    """
    Exponent of convergence delta and the escape rate 1 - delta.
    """
    cache = _load_cache(cache_path)
    delta = census.compute_delta(cache, zeta=ZetaConfig(tol=tol))
    click.echo(f"delta={delta:.12f}")
    click.echo(f"escape_rate={census.escape_rate(delta):.12f}")


@census_group.command("weyl")
@res_option
@click.option(
    "--strip",
    default="0,delta",
    show_default=True,
    help="a0,a1; bounds may be multiples of delta.",
)
@click.option("--delta", type=float, default=None, help="Exponent of convergence.")
@click.option("--fit-min", type=float, default=None, help="Lower end of the fit range.")
@click.option("--fit-max", type=float, default=None, help="Upper end of the fit range.")
@t_range_options
@out_option
def weyl_command(
    res_path: str,
    strip: str,
    delta: Optional[float],
    fit_min: Optional[float],
    fit_max: Optional[float],
    t_min: float,
    t_max: float,
    t_step: float,
    out: Optional[str],
) -> None:
    """
    Strip counting function N(a0, a1; t) and its power-law fit.
    """
    resonances = read_resonances(res_path)
    bounds = [parse_bound(part, delta) for part in strip.split(",")]
    if len(bounds) != 2:
        raise InvalidParametersError(f"--strip needs a0,a1, got '{strip}'")
    t_values = _t_values(t_min, t_max, t_step)
    series = census.counting_strip(resonances, bounds[0], bounds[1], t_values)

    fit = census.weyl_fit(
        series,
        fit_min if fit_min is not None else max(t_min, t_step),
        fit_max if fit_max is not None else t_max,
    )
    click.echo(
        f"exponent={fit.exponent:.6f} prefactor={fit.prefactor:.6g} rms={fit.rms:.3e} samples={fit.samples}"
    )
    if delta is not None:
        click.echo(f"expected={1.0 + delta:.6f}")

    columns = {"t": series.t_values, "count": series.counts}
    if delta is not None:
        columns["reference"] = census.weyl_reference(
            series.t_values, delta, fit.prefactor
        )
    manifest = _census_manifest(
        "weyl", res_path, resonances, strip=bounds, delta=delta, exponent=fit.exponent
    )
    _write_or_echo(out, columns, manifest)


@census_group.command("window")
@res_option
@click.option("--w", "half_width", type=float, required=True, help="Window half width.")
@t_range_options
@out_option
def window_command(
    res_path: str,
    half_width: float,
    t_min: float,
    t_max: float,
    t_step: float,
    out: Optional[str],
) -> None:
    """
    Number of resonances with Re > 0 in the window |Im - t| <= w.
    """
    resonances = read_resonances(res_path)
    series = census.windowed_count(
        resonances, half_width, _t_values(t_min, t_max, t_step)
    )
    manifest = _census_manifest("window", res_path, resonances, w=half_width)
    _write_or_echo(out, {"t": series.t_values, "count": series.counts}, manifest)


@census_group.command("envelope")
@res_option
@click.option("--w", "half_width", type=float, required=True, help="Window half width.")
@t_range_options
@out_option
def envelope_command(
    res_path: str,
    half_width: float,
    t_min: float,
    t_max: float,
    t_step: float,
    out: Optional[str],
) -> None:
    """
    Largest real part in the window |Im - t| <= w; NaN for empty windows.
    """
    resonances = read_resonances(res_path)
    series = census.envelope(resonances, half_width, _t_values(t_min, t_max, t_step))
    manifest = _census_manifest("envelope", res_path, resonances, w=half_width)
    _write_or_echo(out, {"t": series.t_values, "h": series.h_values}, manifest)


@census_group.command("hist")
@res_option
@click.option("--bins", type=int, default=50, show_default=True)
@click.option("--im-range", required=True, help="im0,im1")
@click.option("--re-range", default=None, help="re0,re1")
@out_option
def hist_command(
    res_path: str, bins: int, im_range: str, re_range: Optional[str], out: Optional[str]
) -> None:
    """
    Histogram of the real parts of the resonances in an Im range.
    """
    resonances = read_resonances(res_path)
    re_window = _parse_pair(re_range) if re_range else None
    histogram = census.real_part_histogram(
        resonances, bins, _parse_pair(im_range), re_window
    )
    low, high = histogram.mode_bin
    click.echo(f"mode=[{low:.6g},{high:.6g})")
    columns = {
        "left": histogram.edges[:-1],
        "right": histogram.edges[1:],
        "weight": histogram.weights,
    }
    manifest = _census_manifest(
        "hist", res_path, resonances, bins=bins, im_range=im_range, re_range=re_range
    )
    _write_or_echo(out, columns, manifest)


@census_group.command("density")
@res_option
@click.option("--rect", required=True, help="re0,re1,im0,im1")
@click.option("--bins", default="50,50", show_default=True, help="nx,ny")
@out_option
@click.option(
    "--pgm",
    type=click.Path(dir_okay=False),
    default=None,
    help="Also write a PGM image.",
)
def density_command(
    res_path: str, rect: str, bins: str, out: Optional[str], pgm: Optional[str]
) -> None:
    """
    Two dimensional density of the resonances in a rectangle.
    """
    resonances = read_resonances(res_path)
    nx, ny = _parse_pair(bins, int)
    grid = census.density_grid(resonances, Rect.parse(rect), nx, ny)

    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    columns = {
        "i": i.reshape(-1), "j": j.reshape(-1), "weight": grid.weights.reshape(-1)
    }
    manifest = _census_manifest(
        "density", res_path, resonances, rect=rect, bins=[nx, ny]
    )
    _write_or_echo(out, columns, manifest)
    if pgm is not None:
        Path(pgm).write_text(grid.to_pgm())


@census_group.command("gap")
@res_option
@click.option("--delta", type=float, required=True)
@click.option("--im-max", type=float, required=True)
def gap_command(res_path: str, delta: float, im_max: float) -> None:
    """
    Observed spectral gap below delta.
    """
    report = census.gap_report(read_resonances(res_path), delta, im_max)
    click.echo(f"gap={report.gap:.12g}")
    if report.runner_up is not None:
        click.echo(f"runner_up={_format_complex(report.runner_up.position)}")
    click.echo(f"delta_found={report.first is not None}")


@census_group.command("localized")
@res_option
@click.option(
    "--strip",
    default="0,delta",
    show_default=True,
    help="a0,a1; bounds may be multiples of delta.",
)
@click.option("--delta", type=float, required=True)
@t_range_options
@out_option
def localized_command(
    res_path: str,
    strip: str,
    delta: float,
    t_min: float,
    t_max: float,
    t_step: float,
    out: Optional[str],
) -> None:
    """
    Unit increments N(t + 1) - N(t) of a strip count and their ratio to t^delta.
    """
    resonances = read_resonances(res_path)
    a0, a1 = (parse_bound(part, delta) for part in strip.split(","))
    series = census.localized_increment(
        resonances, a0, a1, _t_values(t_min, t_max, t_step), delta
    )
    manifest = _census_manifest(
        "localized", res_path, resonances, strip=[a0, a1], delta=delta
    )
    _write_or_echo(
        out,
        {"t": series.t_values, "increment": series.increments, "ratio": series.ratios},
        manifest,
    )


@census_group.command("spacing")
@res_option
@click.option("--re-range", required=True, help="re0,re1")
@out_option
def spacing_command(res_path: str, re_range: str, out: Optional[str]) -> None:
    """
    Consecutive Im spacings of the resonances with Re in a range.
    """
    resonances = read_resonances(res_path)
    re_min, re_max = _parse_pair(re_range)
    spacings = census.curve_spacings(resonances, re_min, re_max)
    if spacings.size:
        click.echo(f"spacings={spacings.size} mean={float(spacings.mean()):.9g}")
    else:
        click.echo("spacings=0")
    manifest = _census_manifest(
        "spacing", res_path, resonances, re_range=[re_min, re_max]
    )
    _write_or_echo(
        out, {"index": np.arange(spacings.size), "spacing": spacings}, manifest
    )


@main.command("plot")
@click.option(
    "--in",
    "in_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Series CSV.",
)
@click.option("--x", "x_name", required=True, help="Column on the horizontal axis.")
@click.option(
    "--y",
    "y_names",
    required=True,
    help="Comma separated columns on the vertical axis.",
)
@click.option("--log-log", is_flag=True, help="Logarithmic axes.")
@click.option(
    "--reference",
    multiple=True,
    help="Horizontal guide line NAME=VALUE, e.g. delta=0.1068.",
)
@click.option("--title", default="", help="Plot title.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="SVG file.")
def plot_command(
    in_path: str,
    x_name: str,
    y_names: str,
    log_log: bool,
    reference: tuple[str, ...],
    title: str,
    out: str,
) -> None:
    """
    Line plot of a series CSV as SVG.
    """
    columns, _ = census.read_columns(in_path)
    names = [x_name, *y_names.split(",")]
    missing = [name for name in names if name not in columns]
    if missing:
        raise InvalidParametersError(f"{in_path} has no column(s) {', '.join(missing)}")

    plot = LinePlot(
        title=title or Path(in_path).stem,
        x_label=x_name,
        y_label=y_names,
        log_x=log_log,
        log_y=log_log,
    )
    for name in names[1:]:
        plot.add_series(name, columns[x_name], columns[name])
    for item in reference:
        label, _, value = item.partition("=")
        try:
            plot.add_reference(label, float(value))
        except ValueError:
            raise InvalidParametersError(
                f"Malformed reference '{item}', expected NAME=VALUE"
            ) from None
    Path(out).write_text(plot.render())


if __name__ == "__main__":
    main()
