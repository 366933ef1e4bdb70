"""Plot-data export: aligned ``date,actual,predicted`` CSV and a bare SVG chart."""

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape


@dataclass(frozen=True)
class PlotSeries:
    dates: list
    actual: list
    predicted: list  # None where no window exists

    def __post_init__(self):
        if not (len(self.dates) == len(self.actual) == len(self.predicted)):
            raise ValueError("dates, actual and predicted must have equal length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("plot dates must be strictly increasing")

    def to_csv(self):
        lines = ["date,actual,predicted"]
        for d, a, p in zip(self.dates, self.actual, self.predicted):
            lines.append(f"{d.isoformat()},{a!r},{'' if p is None else repr(float(p))}")
        return "\n".join(lines) + "\n"


def _polyline(xs, ys, sx, sy, color, label):
    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"><title>{label}</title></polyline>'


def render_svg(series, title="", width=900, height=360):
    """Two polylines (actual, predicted) over the series index, with a legend."""
    pad = 40
    n = len(series.dates)
    values = [v for v in series.actual] + [v for v in series.predicted if v is not None]
    lo, hi = min(values), max(values)
    if math.isclose(lo, hi):
        lo, hi = lo - 1.0, hi + 1.0
    sx = lambda i: pad + (width - 2 * pad) * (i / max(n - 1, 1))
    sy = lambda v: height - pad - (height - 2 * pad) * ((v - lo) / (hi - lo))
    pred = [(i, p) for i, p in enumerate(series.predicted) if p is not None]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="20" font-size="13">{escape(title)}</text>',
        f'<text x="{pad}" y="{height - 10}" font-size="10">{series.dates[0].isoformat()}</text>',
        f'<text x="{width - pad}" y="{height - 10}" font-size="10" text-anchor="end">{series.dates[-1].isoformat()}</text>',
        _polyline(range(n), series.actual, sx, sy, "#1f77b4", "actual"),
        _polyline([i for i, _ in pred], [p for _, p in pred], sx, sy, "#d62728", "predicted"),
        f'<g font-size="11"><text x="{width - 150}" y="20" fill="#1f77b4">actual</text>'
        f'<text x="{width - 90}" y="20" fill="#d62728">predicted</text></g>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"
