"""
SVG line charts.

Chart writer for the Keister sweep: a fixed 800x500
viewBox, one ``<polyline>`` per trace, dotted horizontal reference lines and
two axes. The only varying text besides the data is a timestamp comment on
the second line, so outputs compare equal once that line is removed.
"""

from datetime import datetime, timezone
from pathlib import Path

import numpy as np

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT = 60
MARGIN_RIGHT = 20
MARGIN_TOP = 20
MARGIN_BOTTOM = 50

TRACE_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")

TIMESTAMP_PREFIX = "<!-- generated "


def _ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, count)


class LineChart:
    """
    Line chart with reference lines.

    Attributes:
        title: Chart title
        x_label: Horizontal axis label
        y_label: Vertical axis label
        traces: (x, y) arrays, one per trace
        references: y values of dotted horizontal lines
    """

    def __init__(self, title: str, x_label: str, y_label: str):
        self.title = title
        self.x_label = x_label
        self.y_label = y_label
        self.traces: list[tuple[np.ndarray, np.ndarray]] = []
        self.references: list[float] = []

    def add_trace(self, x, y) -> None:
        self.traces.append((np.asarray(x, dtype=float), np.asarray(y, dtype=float)))

    def add_reference(self, y: float) -> None:
        self.references.append(float(y))

    def _bounds(self) -> tuple[float, float, float, float]:
        xs = np.concatenate([x for x, _ in self.traces]) if self.traces else np.zeros(1)
        ys = np.concatenate([y for _, y in self.traces] + [np.asarray(self.references)])
        x_lo, x_hi = float(xs.min()), float(xs.max())
        y_lo, y_hi = float(ys.min()), float(ys.max())
        if x_hi == x_lo:
            x_hi = x_lo + 1.0
        pad = 0.05 * (y_hi - y_lo or 1.0)
        return x_lo, x_hi, y_lo - pad, y_hi + pad

    def to_string(self, timestamp: str | None = None) -> str:
        """
        Render the chart.

        Args:
            timestamp: Text of the timestamp comment; current UTC time if None

        Returns:
            SVG document
        """
        if timestamp is None:
            timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        x_lo, x_hi, y_lo, y_hi = self._bounds()
        plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

        def sx(x):
            return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

        def sy(y):
            return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

        bottom = MARGIN_TOP + plot_h
        right = MARGIN_LEFT + plot_w
        lines = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f"{TIMESTAMP_PREFIX}{timestamp} -->",
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
            f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
            f"<title>{self.title}</title>",
            f'<path class="axis" d="M{MARGIN_LEFT},{MARGIN_TOP} V{bottom} H{right}" '
            'fill="none" stroke="black"/>',
        ]
        for tick in _ticks(x_lo, x_hi):
            lines.append(
                f'<text x="{sx(tick):.2f}" y="{bottom + 16}" text-anchor="middle">{tick:.3g}</text>'
            )
        for tick in _ticks(y_lo, y_hi):
            lines.append(
                f'<text x="{MARGIN_LEFT - 6}" y="{sy(tick) + 4:.2f}" text-anchor="end">{tick:.3g}</text>'
            )
        lines.append(
            f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{HEIGHT - 10}" '
            f'text-anchor="middle">{self.x_label}</text>'
        )
        lines.append(
            f'<text transform="translate(16,{MARGIN_TOP + plot_h / 2:.2f}) rotate(-90)" '
            f'text-anchor="middle">{self.y_label}</text>'
        )
        for y in self.references:
            lines.append(
                f'<line class="reference" x1="{MARGIN_LEFT}" y1="{sy(y):.2f}" '
                f'x2="{right}" y2="{sy(y):.2f}" stroke="gray" stroke-dasharray="2,4"/>'
            )
        for i, (x, y) in enumerate(self.traces):
            points = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
            color = TRACE_COLORS[i % len(TRACE_COLORS)]
            lines.append(
                f'<polyline class="trace" points="{points}" fill="none" '
                f'stroke="{color}" stroke-width="1"/>'
            )
        lines.append("</svg>")
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_string(), encoding="utf-8")
        return path


def strip_timestamp(document: str) -> str:
    """Remove the timestamp comment, for comparing outputs."""
    return "".join(
        line for line in document.splitlines(keepends=True) if not line.startswith(TIMESTAMP_PREFIX)
    )
