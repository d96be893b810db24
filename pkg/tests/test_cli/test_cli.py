import json

import pytest
from click.testing import CliRunner

from schottkyzeta.cli import RunManifest, main, parse_bound
from schottkyzeta.spectral.census import read_columns
from schottkyzeta.spectral.zeros import (
    MANIFEST_PREFIX,
    Resonance,
    read_resonances,
    write_resonances,
)
from schottkyzeta.tools.exceptions import InvalidParametersError


def _run(args):
    result = CliRunner().invoke(main, [str(arg) for arg in args])
    return result


def _manifest(path):
    first = path.read_text().splitlines()[0]
    assert first.startswith(MANIFEST_PREFIX)
    return json.loads(first[len(MANIFEST_PREFIX) :])


@pytest.fixture(scope="module")
def cache_file(tmp_path_factory):
    folder = tmp_path_factory.mktemp("cli")
    path = folder / "x121314.cache"
    result = _run(
        ["cache", "--spec", "X:12,13,14", "--nmax", 8, "--out", path]
        + ["--save-tables", folder / "tables.txt"]
    )
    assert result.exit_code == 0, result.output
    return path


@pytest.fixture
def synthetic_resonances(tmp_path):
    """
    A resonance CSV with delta and one resonance per unit of height on Re s = 0.05
    """
    path = tmp_path / "synthetic.csv"
    resonances = [Resonance(0.1068 + 0j, 1, 1e-13)]
    resonances += [Resonance(complex(0.05, k), 1, 1e-12) for k in range(1, 61)]
    manifest = {
        "command": "locate",
        "rect": [-0.5, 0.2, 0.0, 60.5],
        "spec": "X:12,13,14",
        "n_max": 8,
    }
    write_resonances(path, resonances, manifest)
    return path


def test_help_lists_exit_codes():
    """
    Tests the top level help\n
    Asserts the exit code table in the epilog.
    """
    result = _run(["--help"])
    assert result.exit_code == 0
    assert "Exit codes:" in result.output
    assert "16  floor-violation" in result.output
    assert "3  not-schottky" in result.output


def test_cache(cache_file, tmp_path):
    """
    Tests the cache command\n
    Asserts a byte-identical cache on a rerun with the saved class tables.
    """
    assert cache_file.read_text().startswith("version 1\nsurface X:12,13,14\n")

    again = tmp_path / "again.cache"
    result = _run(
        ["cache", "--spec", "X:12,13,14", "--nmax", 8, "--out", again]
        + ["--tables", cache_file.parent / "tables.txt"]
    )
    assert result.exit_code == 0, result.output
    assert "n=8" in result.output
    assert again.read_bytes() == cache_file.read_bytes()


def test_cache_not_schottky(tmp_path):
    """
    Tests the cache command on a surface with overlapping disks\n
    Asserts exit code 3 and no output file.
    """
    out = tmp_path / "y.cache"
    result = _run(["cache", "--spec", "Y:1,1,1.5", "--nmax", 2, "--out", out])
    assert result.exit_code == 3
    assert "not-schottky" in result.output
    assert not out.exists()


def test_cache_bad_spec(tmp_path):
    """
    Tests the cache command on a malformed spec\n
    Asserts exit code 2.
    """
    result = _run(["cache", "--spec", "Q:1,2", "--out", tmp_path / "q.cache"])
    assert result.exit_code == 2


def test_eval(cache_file):
    """
    Tests the eval command\n
    Asserts a real value on the real axis, the derivative line and the floor check.
    """
    result = _run(["eval", "--cache", cache_file, "--s", "0.5", "--deriv"])
    assert result.exit_code == 0, result.output
    lines = {}
    for line in result.output.splitlines():
        if "=" in line and not line.startswith("["):
            key, value = line.split("=", 1)
            lines[key.strip()] = value.strip()
    assert "i" not in lines["Z(s)"]
    assert "Z'(s)" in lines
    assert int(lines["N"]) in (6, 8)

    result = _run(["eval", "--cache", cache_file, "--s=-1+2i"])
    assert result.exit_code == 16
    result = _run(["eval", "--cache", cache_file, "--s=-1+2i", "--force", "--N", 6])
    assert result.exit_code == 0, result.output
    result = _run(["eval", "--cache", cache_file])
    assert result.exit_code == 2


def test_eval_profile(cache_file, tmp_path):
    """
    Tests the eval command along a segment\n
    Asserts a CSV of the error indicator with its manifest.
    """
    out = tmp_path / "profile.csv"
    result = _run(
        ["eval", "--cache", cache_file, "--profile", "0.1,0.1+50i,11", "--out", out]
    )
    assert result.exit_code == 0, result.output
    columns, manifest = read_columns(out)
    assert list(columns) == ["re", "im", "rel_err"]
    assert len(columns["im"]) == 11
    assert manifest["spec"] == "X:12,13,14"
    assert manifest["parameters"]["N"] == 8


def test_count(cache_file, tmp_path):
    """
    Tests the count command around delta\n
    Asserts one zero, the manifest and identical data on a rerun.
    """
    first, second = tmp_path / "bins1.csv", tmp_path / "bins2.csv"
    for out in (first, second):
        result = _run(
            ["count", "--cache", cache_file, "--rect", "0.05,0.2,-0.1,0.1"]
            + ["--bins", "2,3", "--out", out]
        )
        assert result.exit_code == 0, result.output
        assert "total=1 bins=1" in result.output

    manifest = _manifest(first)
    assert manifest["command"] == "count"
    assert manifest["rect"] == [0.05, 0.2, -0.1, 0.1]
    assert manifest["n_max"] == 8
    assert "threads" not in manifest["sampling"]
    assert first.read_text().splitlines()[1:] == second.read_text().splitlines()[1:]

    columns, _ = read_columns(first)
    assert columns["count"].sum() == 1


def test_count_threads(cache_file, tmp_path):
    """
    Tests the count command with worker threads\n
    Asserts the same data rows as a single threaded run.
    """
    single, pooled = tmp_path / "single.csv", tmp_path / "pooled.csv"
    args = ["count", "--cache", cache_file, "--rect", "0,0.12,1,7", "--bins", "3,4"]
    assert _run([*args, "--out", single]).exit_code == 0
    assert _run(["--threads", 3, *args, "--out", pooled]).exit_code == 0
    assert single.read_text().splitlines()[1:] == pooled.read_text().splitlines()[1:]


def test_count_floor(cache_file):
    """
    Tests the count command below the evaluation floor\n
    Asserts exit code 16.
    """
    result = _run(["count", "--cache", cache_file, "--rect=-1,0.1,0,1"])
    assert result.exit_code == 16
    assert "floor-violation" in result.output


def test_locate(cache_file, tmp_path):
    """
    Tests the locate command around delta\n
    Asserts a single resonance, the coverage rectangle in the manifest and identical
    rows on a rerun.
    """
    first, second = tmp_path / "res1.csv", tmp_path / "res2.csv"
    for out in (first, second):
        result = _run(
            ["locate", "--cache", cache_file, "--rect", "0.05,0.2,-0.07,0.1"]
            + ["--pixel", 0.05, "--out", out]
        )
        assert result.exit_code == 0, result.output
        assert "resonances=1 multiplicity=1 unrefined=0" in result.output

    resonances = read_resonances(first)
    assert len(resonances) == 1
    assert resonances.resonances[0].position.real == pytest.approx(0.1068, abs=5e-4)
    assert resonances.coverage.as_tuple() == (0.05, 0.2, -0.07, 0.1)
    assert resonances.metadata["parameters"]["grid_total"] == 1
    assert first.read_text().splitlines()[1:] == second.read_text().splitlines()[1:]

    # the list only covers Im <= 0.1
    result = _run(["census", "weyl", "--res", first, "--delta", 0.1068, "--t-max", 10])
    assert result.exit_code == 13


def test_census_delta(cache_file):
    """
    Tests census delta\n
    Asserts delta of X(12, 13, 14) and the escape rate.
    """
    result = _run(["census", "delta", "--cache", cache_file])
    assert result.exit_code == 0, result.output
    values = dict(
        line.split("=")
        for line in result.output.splitlines()
        if line.startswith(("delta=", "escape_rate="))
    )
    assert float(values["delta"]) == pytest.approx(0.1068, abs=5e-4)
    assert float(values["escape_rate"]) == pytest.approx(1 - float(values["delta"]))


def test_census_weyl(synthetic_resonances, tmp_path):
    """
    Tests census weyl on a synthetic list\n
    Asserts a linear count, the fit and the reference column.
    """
    out = tmp_path / "weyl.csv"
    args = [
        "census",
        "weyl",
        "--res",
        synthetic_resonances,
        "--delta",
        0.1068,
        "--t-max",
        60,
        "--out",
        out,
    ]
    result = _run(args)
    assert result.exit_code == 0, result.output
    assert "expected=1.106800" in result.output

    columns, manifest = read_columns(out)
    assert list(columns) == ["t", "count", "reference"]
    # delta counts once, every other resonance twice
    assert columns["count"][10] == 1 + 2 * 10
    assert manifest["command"] == "census weyl"
    assert manifest["spec"] == "X:12,13,14"
    assert manifest["parameters"]["strip"] == [0.0, 0.1068]

    result = _run(["census", "weyl", "--res", synthetic_resonances, "--t-max", 60])
    assert result.exit_code == 2


def test_census_windows(synthetic_resonances, tmp_path):
    """
    Tests census window, envelope and localized\n
    Asserts the columns of each series.
    """
    out = tmp_path / "window.csv"
    result = _run(
        ["census", "window", "--res", synthetic_resonances, "--w", 0.5]
        + ["--t-min", 1, "--t-max", 20, "--out", out]
    )
    assert result.exit_code == 0, result.output
    columns, _ = read_columns(out)
    assert set(columns["count"].tolist()) == {1.0}

    out = tmp_path / "envelope.csv"
    result = _run(
        ["census", "envelope", "--res", synthetic_resonances, "--w", 0.25]
        + ["--t-max", 20, "--t-step", 0.5, "--out", out]
    )
    assert result.exit_code == 0, result.output
    columns, _ = read_columns(out)
    assert columns["h"][0] == pytest.approx(0.1068)
    assert columns["h"][2] == pytest.approx(0.05)

    out = tmp_path / "localized.csv"
    args = [
        "census",
        "localized",
        "--res",
        synthetic_resonances,
        "--delta",
        0.1068,
        "--t-min",
        1,
        "--t-max",
        30,
        "--out",
        out,
    ]
    result = _run(args)
    assert result.exit_code == 0, result.output
    columns, _ = read_columns(out)
    assert list(columns) == ["t", "increment", "ratio"]
    assert set(columns["increment"].tolist()) == {2.0}


def test_census_tables(synthetic_resonances, tmp_path):
    """
    Tests census hist, density, gap and spacing\n
    Asserts the printed summaries and the written files.
    """
    result = _run(
        ["census", "hist", "--res", synthetic_resonances, "--bins", 4]
        + ["--im-range", "0,100", "--re-range", "0,0.12"]
    )
    assert result.exit_code == 0, result.output
    assert "mode=[0.03,0.06)" in result.output

    pgm = tmp_path / "density.pgm"
    result = _run(
        [
            "census",
            "density",
            "--res",
            synthetic_resonances,
            "--rect",
            "0,0.12,0,60",
            "--bins",
            "2,6",
            "--out",
            tmp_path / "d.csv",
            "--pgm",
            pgm,
        ]
    )
    assert result.exit_code == 0, result.output
    assert pgm.read_text().splitlines()[:2] == ["P2", "2 6"]

    result = _run(
        ["census", "gap", "--res", synthetic_resonances]
        + ["--delta", 0.1068, "--im-max", 10]
    )
    assert result.exit_code == 0, result.output
    assert "gap=0.0568" in result.output
    assert "delta_found=True" in result.output

    result = _run(
        ["census", "spacing", "--res", synthetic_resonances, "--re-range", "0.04,0.06"]
    )
    assert result.exit_code == 0, result.output
    assert "spacings=59 mean=1" in result.output


def test_plot(synthetic_resonances, tmp_path):
    """
    Tests the plot command on a weyl series\n
    Asserts an SVG with one polyline per column and the guide line, and an error for
    a missing column.
    """
    series = tmp_path / "weyl.csv"
    args = [
        "census",
        "weyl",
        "--res",
        synthetic_resonances,
        "--delta",
        0.1068,
        "--t-min",
        1,
        "--t-max",
        60,
        "--out",
        series,
    ]
    assert _run(args).exit_code == 0

    svg = tmp_path / "weyl.svg"
    args = [
        "plot",
        "--in",
        series,
        "--x",
        "t",
        "--y",
        "count,reference",
        "--log-log",
        "--reference",
        "ten=10",
        "--out",
        svg,
    ]
    result = _run(args)
    assert result.exit_code == 0, result.output
    text = svg.read_text()
    assert text.startswith("<svg")
    assert text.count("<polyline") == 2
    assert "ten" in text

    result = _run(["plot", "--in", series, "--x", "t", "--y", "missing", "--out", svg])
    assert result.exit_code == 2


def test_parse_bound():
    """
    Tests parse_bound\n
    Asserts decimals, multiples of delta and the missing delta error.
    """
    assert parse_bound("0.05", None) == 0.05
    assert parse_bound("delta", 0.1) == 0.1
    assert parse_bound("delta/2", 0.1) == pytest.approx(0.05)
    with pytest.raises(InvalidParametersError):
        parse_bound("delta/2", None)
    with pytest.raises(InvalidParametersError):
        parse_bound("half", 0.1)


def test_run_manifest():
    """
    Tests RunManifest.to_dict\n
    Asserts that unset fields are dropped.
    """
    manifest = RunManifest(command="count", rect=(0.0, 1.0, 0.0, 2.0)).to_dict()
    assert set(manifest) == {"command", "rect", "version", "created"}
