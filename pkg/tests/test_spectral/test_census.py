import math
from types import SimpleNamespace

import numpy as np
import pytest

from schottkyzeta.geometry.schottky import (
    build_from_spec,
    build_funneled_torus,
    build_three_funnel,
)
from schottkyzeta.geometry.words import build_length_cache
from schottkyzeta.spectral.census import (
    CountSeries,
    DeltaConfig,
    compute_delta,
    counting_strip,
    curve_spacings,
    density_grid,
    envelope,
    escape_rate,
    format_cell,
    gap_report,
    localized_increment,
    read_columns,
    real_part_histogram,
    weyl_fit,
    weyl_reference,
    windowed_count,
    write_columns,
)
from schottkyzeta.spectral.zeros import (
    Rect,
    Resonance,
    ResonanceList,
    SamplingConfig,
    bin_count_grid,
)
from schottkyzeta.spectral.zeta import zeta_eval
from schottkyzeta.tools.exceptions import (
    ElementaryOrOutOfRangeError,
    IncompleteDataError,
    InsufficientDataError,
    InvalidParametersError,
)

DELTA = 0.1068


@pytest.fixture
def resonances():
    return [
        Resonance(DELTA + 0j, 1, 1e-13),
        Resonance(0.05 + 2j, 1, 1e-12),
        Resonance(0.02 + 5j, 2, 1e-12),
        Resonance(0.0 + 1j, 1, 1e-12),
        Resonance(-0.3 + 4j, 1, 1e-12),
        Resonance(0.085 + 6j, 1, 1e-12),
    ]


def test_compute_delta(x121314_cache, x121212_cache):
    """
    Tests compute_delta on X(12, 13, 14) and X(12, 12, 12)\n
    Asserts the known exponents and a vanishing Z at the result.
    """
    delta = compute_delta(x121314_cache)
    assert delta == pytest.approx(0.1068, abs=5e-4)
    assert abs(zeta_eval(x121314_cache, delta).value) < 1e-10
    assert compute_delta(x121212_cache) == pytest.approx(0.1155, abs=5e-4)


def test_compute_delta_errors(x121314_cache, mocker):
    """
    Tests the compute_delta guards\n
    Asserts an error for a scan start outside [0, 1], for a short cache and for a scan
    without a sign change.
    """
    with pytest.raises(InvalidParametersError) as error:
        DeltaConfig(start=1.5)
    assert "checked_start must be within 0.0 and 1.0" in str(error.value)
    with pytest.raises(InvalidParametersError):
        compute_delta(x121314_cache, DeltaConfig(min_nmax=9))

    mocker.patch(
        "schottkyzeta.spectral.census.zeta_values",
        return_value=SimpleNamespace(values=np.ones(100, dtype=complex)),
    )
    with pytest.raises(ElementaryOrOutOfRangeError):
        compute_delta(x121314_cache)


def test_compute_delta_other_surfaces(y_torus, class_tables):
    """
    Tests compute_delta on Y(12, 13, pi/2), Y(12, 12, pi/2), X(12, 12.8, 13.6) and
    X(12, 13.2, 14.4)\n
    Asserts the known exponents.
    """
    y_cache = build_length_cache(y_torus, 8, tables=class_tables)
    assert compute_delta(y_cache) == pytest.approx(0.0913, abs=5e-4)
    square = build_funneled_torus(12, 12, math.pi / 2, phi_text="pi/2")
    square_cache = build_length_cache(square, 8, tables=class_tables)
    assert compute_delta(square_cache) == pytest.approx(0.0953, abs=5e-4)
    cache = build_length_cache(
        build_three_funnel(12, 12.8, 13.6), 8, tables=class_tables
    )
    assert compute_delta(cache) == pytest.approx(0.1084, abs=5e-4)
    cache = build_length_cache(
        build_three_funnel(12, 13.2, 14.4), 8, tables=class_tables
    )
    assert compute_delta(cache) == pytest.approx(0.1053, abs=5e-4)


def test_counting_strip(resonances):
    """
    Tests counting_strip\n
    Asserts conjugate doubling off the axis, single counting on it and the half open
    strip [a0, a1).
    """
    series = counting_strip(resonances, 0.0, 0.11, [0, 1, 2, 4.9, 5, 10])
    assert isinstance(series, CountSeries)
    np.testing.assert_array_equal(series.counts, [1, 3, 5, 5, 9, 11])
    assert series.strip == (0.0, 0.11)

    series = counting_strip(resonances, 0.0, 0.09, [10])
    assert series.counts[0] == 10
    assert counting_strip([], 0.0, 1.0, [1, 2]).counts.tolist() == [0, 0]


def test_counting_strip_coverage(resonances):
    """
    Tests the coverage checks of counting_strip\n
    Asserts an IncompleteDataError whenever the query leaves the located rectangle.
    """
    listing = ResonanceList(resonances, coverage=Rect(-0.5, 0.2, 0.0, 4.0))
    assert counting_strip(listing, 0.0, 0.11, [4.0]).counts[0] == 5
    with pytest.raises(IncompleteDataError):
        counting_strip(listing, 0.0, 0.11, [10.0])
    with pytest.raises(IncompleteDataError):
        counting_strip(listing, 0.0, 0.3, [1.0])

    raised = ResonanceList(resonances, coverage=Rect(-0.5, 0.2, 1.0, 10.0))
    with pytest.raises(IncompleteDataError):
        counting_strip(raised, 0.0, 0.11, [2.0])


def test_windowed_count(resonances):
    """
    Tests windowed_count\n
    Asserts the counts of resonances with positive real part near each height.
    """
    series = windowed_count(resonances, 0.5, [0.0, 2.0, 5.0, 5.5, -2.0])
    np.testing.assert_array_equal(series.counts, [1, 1, 2, 3, 1])
    assert series.window == 0.5
    with pytest.raises(InvalidParametersError):
        windowed_count(resonances, 0.0, [1.0])


def test_envelope(resonances):
    """
    Tests envelope\n
    Asserts the maximal real part per window, NaN for empty windows and for windows
    past the covered range.
    """
    series = envelope(resonances, 0.5, [0.0, 2.0, 3.0, 5.5])
    np.testing.assert_allclose(series.h_values, [DELTA, 0.05, np.nan, 0.085])

    covered = envelope(
        ResonanceList(resonances, coverage=Rect(-0.5, 0.2, 0.0, 5.0)), 0.5, [2.0, 5.5]
    )
    assert covered.h_values[0] == pytest.approx(0.05)
    assert math.isnan(covered.h_values[1])


def test_real_part_histogram(resonances):
    """
    Tests real_part_histogram\n
    Asserts multiplicity weighted bins and the mode.
    """
    histogram = real_part_histogram(resonances, 4, (0.0, 10.0), re_range=(0.0, 0.12))
    np.testing.assert_allclose(histogram.weights, [3, 1, 1, 1])
    assert histogram.mode_bin == pytest.approx((0.0, 0.03))
    assert histogram.centers[0] == pytest.approx(0.015)

    upper = real_part_histogram(resonances, 2, (1.5, 10.0))
    assert upper.edges[-1] == pytest.approx(0.085)


def test_density_grid(resonances):
    """
    Tests density_grid and its PGM export\n
    Asserts the per cell weights and the image rows with Im increasing upward.
    """
    grid = density_grid(resonances, Rect(0.0, 0.12, 0.0, 6.0), 2, 3)
    np.testing.assert_allclose(grid.weights, [[1, 1, 2], [1, 0, 1]])
    assert grid.to_pgm().splitlines() == ["P2", "2 3", "2", "2 1", "1 0", "1 1"]

    empty = density_grid([], Rect(0.0, 1.0, 0.0, 1.0), 2, 2)
    assert empty.to_pgm().splitlines()[2] == "1"
    with pytest.raises(InvalidParametersError):
        density_grid(resonances, Rect(0.0, 1.0, 0.0, 1.0), 0, 2)


def test_weyl_fit():
    """
    Tests weyl_fit on an exact power law\n
    Asserts the exponent and prefactor, and an error without enough samples.
    """
    t = np.linspace(10.0, 1000.0, 100)
    fit = weyl_fit(CountSeries(t, 3.0 * t**1.12, (0.0, DELTA)), 10.0, 1000.0)
    assert fit.exponent == pytest.approx(1.12, rel=1e-9)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-9)
    assert fit.rms < 1e-9
    assert fit.samples == 100

    with pytest.raises(InsufficientDataError):
        weyl_fit(CountSeries(t, 3.0 * t**1.12, (0.0, DELTA)), 10.0, 40.0)
    with pytest.raises(InsufficientDataError):
        weyl_fit(CountSeries(t, np.zeros_like(t), (0.0, DELTA)), 10.0, 1000.0)


def test_escape_rate():
    """
    Tests escape_rate\n
    Asserts 1 - delta and the range check.
    """
    assert escape_rate(DELTA) == pytest.approx(1 - DELTA)
    for delta in (0.0, 1.0):
        with pytest.raises(InvalidParametersError):
            escape_rate(delta)


def test_gap_report(resonances):
    """
    Tests gap_report\n
    Asserts the resonance at delta, the runner up and the Im cutoff.
    """
    report = gap_report(resonances, DELTA, 10.0)
    assert report.first == resonances[0]
    assert report.runner_up == resonances[5]
    assert report.gap == pytest.approx(DELTA - 0.085)

    report = gap_report(resonances, DELTA, 5.0)
    assert report.runner_up == resonances[1]
    assert report.gap == pytest.approx(DELTA - 0.05)

    assert gap_report(resonances[:1], DELTA, 10.0).gap == math.inf


def test_localized_increment(resonances):
    """
    Tests localized_increment\n
    Asserts the unit increments of the strip count and their ratio to t^delta.
    """
    series = localized_increment(resonances, 0.0, 0.11, [1.0, 4.0], DELTA)
    np.testing.assert_array_equal(series.increments, [2, 4])
    np.testing.assert_allclose(series.ratios, [2.0, 4.0 / 4.0**DELTA])


def test_weyl_reference_and_spacings(resonances):
    """
    Tests weyl_reference and curve_spacings\n
    Asserts the guide line values and the Im spacings in a real part window.
    """
    np.testing.assert_allclose(weyl_reference([1.0, 4.0], 0.5, 2.0), [2.0, 16.0])
    np.testing.assert_allclose(curve_spacings(resonances, 0.0, 0.06), [1.0, 3.0])
    assert curve_spacings([], 0.0, 1.0).size == 0


def test_columns_file(tmp_path):
    """
    Tests write_columns and read_columns\n
    Asserts the manifest line, the cell format and the values read back.
    """
    path = tmp_path / "series.csv"
    write_columns(
        path,
        {"t": np.array([1.0, 2.5]), "count": np.array([3, 5])},
        manifest={"command": "weyl"},
    )
    lines = path.read_text().splitlines()
    assert lines[0] == '# manifest {"command": "weyl"}'
    assert lines[1:] == ["t,count", "1,3", "2.5,5"]

    columns, manifest = read_columns(path)
    np.testing.assert_array_equal(columns["t"], [1.0, 2.5])
    np.testing.assert_array_equal(columns["count"], [3.0, 5.0])
    assert manifest == {"command": "weyl"}

    with pytest.raises(InvalidParametersError):
        write_columns(path, {"a": np.zeros(2), "b": np.zeros(3)})


def test_format_cell():
    """
    Tests format_cell\n
    Asserts integers without a decimal point and floats with 15 significant digits.
    """
    assert format_cell(3) == "3"
    assert format_cell(np.int64(4)) == "4"
    assert format_cell(0.1) == "0.1"
    assert format_cell(1 / 3) == "0.333333333333333"


@pytest.mark.slow
def test_compute_delta_deep_cache():
    """
    Tests compute_delta on X(12, 14, 15) with words up to length 10\n
    Asserts the exponent 0.101821 to 2e-4.
    """
    cache = build_length_cache(build_three_funnel(12, 14, 15), 10)
    assert compute_delta(cache) == pytest.approx(0.101821, abs=2e-4)


def _binned(grid):
    # one unrefined resonance per positive bin, at the bin center
    return [
        Resonance(
            grid.bin_rect(i, j).center,
            int(grid.counts[i, j]),
            0.0,
            bin=(i, j),
            refined=False,
        )
        for i, j in grid.positive_bins()
    ]


@pytest.mark.slow
@pytest.mark.parametrize(
    "spec, at_half", [("X:12,12,12", True), ("Y:12,13,pi/2", False)]
)
def test_real_part_histogram_mode(class_tables, spec, at_half):
    """
    Tests real_part_histogram over Im in [0, 2000] with 40 bins on [0, delta]\n
    Asserts that the mode bin holds delta / 2 for X(12, 12, 12) and not for
    Y(12, 13, pi/2).
    """
    cache = build_length_cache(build_from_spec(spec), 8, tables=class_tables)
    delta = compute_delta(cache)
    grid = bin_count_grid(
        cache, Rect(0.0, delta, 0.5, 2000.0), 40, 1, SamplingConfig(
            max_depth=20, threads=4
        )
    )
    histogram = real_part_histogram(_binned(grid), 40, (0.0, 2000.0), (0.0, delta))
    assert histogram.weights.sum() == grid.total
    low, high = histogram.mode_bin
    assert (low <= delta / 2 <= high) == at_half


@pytest.mark.slow
def test_weyl_fit_strip_ordering(class_tables):
    """
    Tests weyl_fit on the strips Re >= 3 delta / 4, Re >= delta / 2 and Re >= 0 of
    X(12, 14, 15) up to Im = 2000\n
    Asserts that the fitted exponents do not decrease as the strip widens.
    """
    cache = build_length_cache(build_three_funnel(12, 14, 15), 8, tables=class_tables)
    delta = compute_delta(cache)
    grid = bin_count_grid(
        cache, Rect(0.0, delta, 0.5, 2000.0), 4, 100, SamplingConfig(
            max_depth=20, threads=4
        )
    )
    res = _binned(grid)
    t = grid.ys[1:]

    def exponent(a0):
        return weyl_fit(counting_strip(res, a0, delta, t), 200.0, 2000.0).exponent

    narrow, half, full = exponent(0.75 * delta), exponent(0.5 * delta), exponent(0.0)
    assert narrow < half
    assert half <= full + 1e-9
