import numpy as np

from schottkyzeta.geometry.schottky import build_three_funnel
from schottkyzeta.geometry.words import build_length_cache
from schottkyzeta.spectral.census import compute_delta
from schottkyzeta.spectral.zeros import (
    Rect,
    SamplingConfig,
    bin_count_grid,
    locate_all,
    write_resonances,
)
from schottkyzeta.spectral.zeta import error_profile, zeta_eval
from schottkyzeta.tools.logger import Logger

logger = Logger(file_path="./locating_resonances")

cache = build_length_cache(build_three_funnel(12, 13, 14), 10)

evaluation = zeta_eval(cache, 0.1 + 10j, with_deriv=True)
print(evaluation)
print(f"N={evaluation.N} rel_err={evaluation.rel_err:.2e}")

heights = np.linspace(0.0, 200.0, 9)
print(error_profile(cache, 0.1 + 1j * heights, cache.n_max))

delta = compute_delta(cache)
print(f"delta={delta:.10f}")

sampling = SamplingConfig(min_spacing=0.005, threads=4)
grid = bin_count_grid(cache, Rect(0.0, 0.12, 0.0, 20.0), 6, 20, sampling, logger)
print(grid, grid.counts.T[::-1])

resonances = locate_all(
    cache, Rect(0.0, 0.12, 0.0, 20.0), 0.01, sampling, logger=logger
)
for resonance in resonances:
    print(resonance)

write_resonances(
    "./x121314_resonances.csv", resonances, {"rect": [0.0, 0.12, 0.0, 20.0]}
)
logger.close()
