from typing import Optional, Sequence

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .exceptions import InvalidParametersError

"""
Minimal SVG line plots for series files.

Usage:
1. Create a `LinePlot`, optionally with ``log_x``/``log_y``.
2. Add curves with `add_series` and horizontal guide lines with `add_reference`.
3. Call `render` for the SVG text.
"""

PALETTE = ["#1f4e79", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#2c3e50"]


@dataclass
class LinePlot:
    """
    Line plot with linear or logarithmic axes.

    Args:
        title (str): Plot title
        x_label (str): Label of the horizontal axis
        y_label (str): Label of the vertical axis
        log_x (bool): Logarithmic horizontal axis. Defaults to False.
        log_y (bool): Logarithmic vertical axis. Defaults to False.
        width (int): Canvas width in px
        height (int): Canvas height in px
    """

    title: str = ""
    x_label: str = ""
    y_label: str = ""
    log_x: bool = False
    log_y: bool = False
    width: int = 640
    height: int = 420
    margin: int = 60
    _series: list[tuple[str, np.ndarray, np.ndarray]] = field(
        default_factory=list, init=False, repr=False
    )
    _references: list[tuple[str, float]] = field(
        default_factory=list, init=False, repr=False
    )

    def __repr__(self) -> str:
        return f"LinePlot[{self.title}]"

    def add_series(self, name: str, x: Sequence[float], y: Sequence[float]) -> None:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if x.shape != y.shape:
            raise InvalidParametersError(
                f"Series '{name}' has {x.size} x values and {y.size} y values"
            )
        self._series.append((name, x, y))

    def add_reference(self, name: str, y: float) -> None:
        self._references.append((name, float(y)))

    def _transform(self, values: np.ndarray, log: bool) -> np.ndarray:
        if not log:
            return values
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(values > 0, np.log10(values), np.nan)

    def _limits(self) -> tuple[float, float, float, float]:
        xs = [self._transform(x, self.log_x) for _, x, _ in self._series]
        ys = [self._transform(y, self.log_y) for _, _, y in self._series]
        ys.append(
            self._transform(np.array([y for _, y in self._references]), self.log_y)
        )
        x_all = np.concatenate(xs) if xs else np.zeros(0)
        y_all = np.concatenate(ys)
        x_all, y_all = x_all[np.isfinite(x_all)], y_all[np.isfinite(y_all)]
        if x_all.size == 0 or y_all.size == 0:
            raise InvalidParametersError("Nothing finite to plot")

        x0, x1 = float(x_all.min()), float(x_all.max())
        y0, y1 = float(y_all.min()), float(y_all.max())
        if x0 == x1:
            x0, x1 = x0 - 1.0, x1 + 1.0
        if y0 == y1:
            y0, y1 = y0 - 1.0, y1 + 1.0
        return x0, x1, y0, y1

    def render(self) -> str:
        x0, x1, y0, y1 = self._limits()
        left, top = self.margin, self.margin / 2
        plot_w, plot_h = self.width - 1.5 * self.margin, self.height - 1.5 * self.margin

        def px(x: np.ndarray) -> np.ndarray:
            return left + (x - x0) / (x1 - x0) * plot_w

        def py(y: np.ndarray) -> np.ndarray:
            return top + (1.0 - (y - y0) / (y1 - y0)) * plot_h

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'font-family="sans-serif" font-size="11">',
            f'<rect x="{left}" y="{top}" width="{plot_w:.1f}" height="{plot_h:.1f}" fill="none" stroke="black"/>',
            f'<text x="{self.width / 2:.1f}" y="{top - 8:.1f}" text-anchor="middle">{escape(self.title)}</text>',
            f'<text x="{self.width / 2:.1f}" y="{self.height - 8:.1f}" text-anchor="middle">'
            f"{escape(self._axis_label(self.x_label, self.log_x))}</text>",
            f'<text x="14" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {top + plot_h / 2:.1f})">{escape(self._axis_label(self.y_label, self.log_y))}</text>',
        ]

        for value in np.linspace(x0, x1, 5):
            parts.append(
                f'<text x="{px(value):.1f}" y="{top + plot_h + 14:.1f}" text-anchor="middle">{_tick(value)}</text>'
            )
        for value in np.linspace(y0, y1, 5):
            parts.append(
                f'<text x="{left - 4}" y="{py(value) + 4:.1f}" text-anchor="end">{_tick(value)}</text>'
            )

        for name, y in self._references:
            level = self._transform(np.array([y]), self.log_y)[0]
            if not math.isfinite(level):
                continue
            parts.append(
                f'<line x1="{left}" x2="{left + plot_w:.1f}" y1="{py(level):.1f}" y2="{py(level):.1f}" '
                f'stroke="gray" stroke-dasharray="4 3"/>'
            )
            parts.append(
                f'<text x="{left + plot_w - 4:.1f}" y="{py(level) - 3:.1f}" text-anchor="end" fill="gray">'
                f"{escape(name)}</text>"
            )

        for index, (name, x, y) in enumerate(self._series):
            color = PALETTE[index % len(PALETTE)]
            tx, ty = self._transform(x, self.log_x), self._transform(y, self.log_y)
            for run in _finite_runs(tx, ty):
                points = " ".join(
                    f"{a:.2f},{b:.2f}" for a, b in zip(px(tx[run]), py(ty[run]))
                )
                parts.append(
                    f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.2"/>'
                )
            parts.append(
                f'<text x="{left + 8}" y="{top + 14 + 13 * index:.1f}" fill="{color}">{escape(name)}</text>'
            )

        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    @staticmethod
    def _axis_label(label: str, log: bool) -> str:
        return f"log10 {label}" if log and label else label


def _tick(value: float) -> str:
    return f"{value:.4g}"


def _finite_runs(x: np.ndarray, y: np.ndarray) -> list[slice]:
    # NaN gaps split a curve into separate polylines
    finite = np.isfinite(x) & np.isfinite(y)
    runs: list[slice] = []
    start: Optional[int] = None
    for index, ok in enumerate(finite):
        if ok and start is None:
            start = index
        elif not ok and start is not None:
            runs.append(slice(start, index))
            start = None
    if start is not None:
        runs.append(slice(start, len(finite)))
    return runs
