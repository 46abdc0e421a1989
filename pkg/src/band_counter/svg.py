"""A small SVG 1.1 line-plot writer for diagnostic figures."""

from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT, PAD = 640, 420, 56


class Plot:
    def __init__(self, xlim, ylim, title: str = "", xlabel: str = "", ylabel: str = ""):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("plot limits must be increasing")
        self.items: list[str] = []
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel

    def _px(self, x: float) -> float:
        return PAD + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * PAD)

    def _py(self, y: float) -> float:
        y = min(max(y, self.y0), self.y1)
        return HEIGHT - PAD - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * PAD)

    def polyline(self, xs, ys, color: str = "#1f77b4", cls: str = "series") -> None:
        pts = " ".join(f"{self._px(x):.2f},{self._py(y):.2f}" for x, y in zip(xs, ys))
        self.items.append(f'<polyline class="{cls}" fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')

    def markers(self, xs, ys, color: str = "#1f77b4") -> None:
        for x, y in zip(xs, ys):
            self.items.append(f'<circle class="marker" cx="{self._px(x):.2f}" cy="{self._py(y):.2f}" r="2" fill="{color}"/>')

    def hline(self, y: float, color: str = "#d62728") -> None:
        self.items.append(
            f'<line class="hline" x1="{PAD}" x2="{WIDTH - PAD}" y1="{self._py(y):.2f}" y2="{self._py(y):.2f}" '
            f'stroke="{color}" stroke-dasharray="4 3"/>'
        )

    def vline(self, x: float, color: str = "#2ca02c") -> None:
        self.items.append(
            f'<line class="vline" x1="{self._px(x):.2f}" x2="{self._px(x):.2f}" y1="{PAD}" y2="{HEIGHT - PAD}" '
            f'stroke="{color}" stroke-dasharray="4 3"/>'
        )

    def render(self) -> str:
        frame = (
            f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
            f'fill="none" stroke="#000"/>'
        )
        ticks = [
            f'<text x="{PAD}" y="{HEIGHT - PAD + 16}" font-size="11">{self.x0:.3g}</text>',
            f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD + 16}" font-size="11" text-anchor="end">{self.x1:.3g}</text>',
            f'<text x="{PAD - 4}" y="{HEIGHT - PAD}" font-size="11" text-anchor="end">{self.y0:.3g}</text>',
            f'<text x="{PAD - 4}" y="{PAD + 8}" font-size="11" text-anchor="end">{self.y1:.3g}</text>',
        ]
        labels = [
            f'<text x="{WIDTH / 2}" y="{PAD / 2}" font-size="14" text-anchor="middle">{escape(self.title)}</text>',
            f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="12" text-anchor="middle">{escape(self.xlabel)}</text>',
            f'<text x="14" y="{HEIGHT / 2}" font-size="12" transform="rotate(-90 14 {HEIGHT / 2})" '
            f'text-anchor="middle">{escape(self.ylabel)}</text>',
        ]
        body = "\n".join([frame, *ticks, *labels, *self.items])
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">\n{body}\n</svg>\n'
        )
