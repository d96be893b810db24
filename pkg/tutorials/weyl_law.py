import numpy as np

from schottkyzeta.geometry.schottky import build_three_funnel
from schottkyzeta.geometry.words import build_length_cache
from schottkyzeta.spectral.census import (
    compute_delta,
    counting_strip,
    weyl_fit,
    weyl_reference,
    write_columns,
)
from schottkyzeta.spectral.zeros import Rect, SamplingConfig, locate_all
from schottkyzeta.tools.svg import LinePlot

T_MAX = 60.0

cache = build_length_cache(build_three_funnel(12, 13, 14), 10)
delta = compute_delta(cache)

resonances = locate_all(
    cache, Rect(0.0, delta + 0.005, 0.0, T_MAX), 0.01, SamplingConfig(threads=4)
)

t_values = np.arange(1.0, T_MAX + 1.0)
series = counting_strip(resonances, 0.0, delta, t_values)
fit = weyl_fit(series, 10.0, T_MAX)
print(f"exponent={fit.exponent:.4f} expected={1 + delta:.4f}")

reference = weyl_reference(t_values, delta, fit.prefactor)
write_columns(
    "./weyl.csv", {"t": t_values, "count": series.counts, "reference": reference}
)

plot = LinePlot(
    title="X(12, 13, 14)", x_label="t", y_label="N(t)", log_x=True, log_y=True
)
plot.add_series("count", t_values, series.counts)
plot.add_series("t^(1 + delta)", t_values, reference)
with open("./weyl.svg", "w") as handle:
    handle.write(plot.render())
