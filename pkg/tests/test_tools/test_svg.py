import math

import pytest

from schottkyzeta.tools.exceptions import InvalidParametersError
from schottkyzeta.tools.svg import LinePlot


def test_render():

    plot = LinePlot(title="N(t) <strip>", x_label="t", y_label="count")
    plot.add_series("count", [1, 2, 3, 4], [2, 4, 6, 8])
    plot.add_reference("delta", 5.0)
    text = plot.render()

    assert text.startswith("<svg")
    assert text.rstrip().endswith("</svg>")
    assert text.count("<polyline") == 1
    assert "stroke-dasharray" in text
    assert "N(t) &lt;strip&gt;" in text


def test_render_gaps_and_log():

    plot = LinePlot(log_x=True, log_y=True, x_label="t")
    plot.add_series("h", [1, 10, 100, 1000, 10000], [0.1, math.nan, 0.1, 0.09, 0.0])
    text = plot.render()

    # NaN and the nonpositive value on the log axis split the curve
    assert text.count("<polyline") == 2
    assert "log10 t" in text


def test_render_errors():

    plot = LinePlot()
    with pytest.raises(InvalidParametersError):
        plot.add_series("bad", [1, 2, 3], [1, 2])

    plot.add_series("nothing", [1, 2], [math.nan, math.nan])
    with pytest.raises(InvalidParametersError):
        plot.render()
