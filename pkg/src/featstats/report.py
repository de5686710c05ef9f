"""Deterministic SVG line charts and the report bundle writer.

Charts are hand-assembled SVG text (no graphics dependency): byte-identical
output for identical inputs, so they can be diffed in tests.  Each chart
plots one statistic against epoch, with the score series on a twin right
axis when scores exist.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

WIDTH, HEIGHT = 640, 360
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 60, 30, 40
PLOT_W = WIDTH - MARGIN_L - MARGIN_R
PLOT_H = HEIGHT - MARGIN_T - MARGIN_B


def _scale(values: Sequence[float], lo: float, hi: float, out_lo: float, out_hi: float):
    if hi <= lo:
        mid = (out_lo + out_hi) / 2.0
        return [mid for _ in values]
    k = (out_hi - out_lo) / (hi - lo)
    return [out_lo + (v - lo) * k for v in values]


def _polyline(xs, ys, color: str) -> str:
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return (f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{points}" />')


def line_chart_svg(
    epochs: Sequence[int],
    primary: Sequence[float],
    primary_label: str,
    secondary: Optional[Sequence[float]] = None,
    secondary_label: str = "score",
) -> str:
    """One or two polylines over an epoch axis; secondary uses the right axis."""
    xs = _scale(epochs, min(epochs), max(epochs), MARGIN_L, MARGIN_L + PLOT_W)
    p_lo, p_hi = min(primary), max(primary)
    ys = _scale(primary, p_lo, p_hi, MARGIN_T + PLOT_H, MARGIN_T)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white" />',
        # axes
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + PLOT_H}" x2="{MARGIN_L + PLOT_W}" '
        f'y2="{MARGIN_T + PLOT_H}" stroke="black" />',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
        f'y2="{MARGIN_T + PLOT_H}" stroke="black" />',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 8}" text-anchor="middle" '
        f'font-size="12">epoch {min(epochs)}..{max(epochs)}</text>',
        f'<text x="14" y="{MARGIN_T + PLOT_H // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {MARGIN_T + PLOT_H // 2})">{primary_label}</text>',
        _polyline(xs, ys, "#1f77b4"),
    ]
    if secondary is not None:
        s_lo, s_hi = min(secondary), max(secondary)
        ys2 = _scale(secondary, s_lo, s_hi, MARGIN_T + PLOT_H, MARGIN_T)
        parts.append(
            f'<line x1="{MARGIN_L + PLOT_W}" y1="{MARGIN_T}" x2="{MARGIN_L + PLOT_W}" '
            f'y2="{MARGIN_T + PLOT_H}" stroke="black" />')
        parts.append(
            f'<text x="{WIDTH - 14}" y="{MARGIN_T + PLOT_H // 2}" text-anchor="middle" '
            f'font-size="12" transform="rotate(90 {WIDTH - 14} '
            f'{MARGIN_T + PLOT_H // 2})">{secondary_label}</text>')
        parts.append(_polyline(xs, ys2, "#d62728"))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@dataclass
class ReportBundle:
    """Files produced for one run; the index lists every artifact written."""

    out_dir: Path
    files: dict[str, str] = field(default_factory=dict)

    def add(self, key: str, name: str, content: str) -> Path:
        path = self.out_dir / name
        path.write_text(content, encoding="utf-8")
        self.files[key] = name
        return path

    def write_index(self) -> Path:
        path = self.out_dir / "index.json"
        path.write_text(json.dumps(self.files, indent=2) + "\n", encoding="utf-8")
        return path
