from schottkyzeta.geometry.schottky import (
    build_group,
    parse_surface_spec,
    perturbation_family,
)
from schottkyzeta.geometry.words import build_class_table, build_length_cache
from schottkyzeta.spectral.census import compute_delta, escape_rate, gap_report
from schottkyzeta.spectral.zeros import Rect, locate_all

N_MAX = 8
tables = {n: build_class_table(2, n) for n in range(1, N_MAX + 1)}

for spec in perturbation_family(parse_surface_spec("X:12,12,12"), 3, 0.4):
    cache = build_length_cache(build_group(spec), N_MAX, tables=tables)
    delta = compute_delta(cache)
    resonances = locate_all(cache, Rect(0.0, delta + 0.005, 0.0, 10.0), 0.01)
    report = gap_report(resonances, delta, 10.0)
    print(
        f"{spec}: delta={delta:.6f} escape_rate={escape_rate(delta):.6f} gap={report.gap:.6f}"
    )
