"""Native SVG emission for trajectories, infeasibility heat maps and
distance-rate phase portraits. No plotting dependency; output contains
no timestamps so identical inputs give identical bytes."""

from __future__ import annotations

import math

import numpy as np

from . import safety
from .safety import SafetyIndexSpec

__all__ = ["SvgCanvas", "trajectory_svg", "heatmap_svg", "phase_svg"]


class SvgCanvas:
    """Fixed-size canvas with a data-to-pixel affine map."""

    def __init__(self, width=640, height=480, margin=50):
        self.width = width
        self.height = height
        self.margin = margin
        self._parts = []
        self._xlim = (0.0, 1.0)
        self._ylim = (0.0, 1.0)

    def set_limits(self, xlim, ylim):
        def widen(lo, hi):
            if hi - lo < 1e-12:
                pad = max(abs(lo), 1.0) * 0.05 + 1e-9
                return lo - pad, hi + pad
            return lo, hi

        self._xlim = widen(*xlim)
        self._ylim = widen(*ylim)

    def px(self, x):
        lo, hi = self._xlim
        return self.margin + (x - lo) / (hi - lo) * (self.width - 2 * self.margin)

    def py(self, y):
        lo, hi = self._ylim
        return self.height - self.margin - (y - lo) / (hi - lo) * (
            self.height - 2 * self.margin
        )

    def polyline(self, xs, ys, color="black", width=1.5, dash=None):
        pts = " ".join(
            f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys)
        )
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self._parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{extra}/>'
        )

    def circle(self, x, y, r_data, color="black", fill="none"):
        rp = abs(self.px(x + r_data) - self.px(x))
        self._parts.append(
            f'<circle cx="{self.px(x):.2f}" cy="{self.py(y):.2f}" r="{rp:.2f}" '
            f'stroke="{color}" fill="{fill}"/>'
        )

    def rect_px(self, x0, y0, w, h, fill, stroke="none"):
        self._parts.append(
            f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{w:.2f}" height="{h:.2f}" '
            f'fill="{fill}" stroke="{stroke}"/>'
        )

    def cell(self, x0, x1, y0, y1, fill):
        xa, xb = self.px(x0), self.px(x1)
        ya, yb = self.py(y1), self.py(y0)
        self.rect_px(xa, ya, xb - xa, yb - ya, fill)

    def text(self, x_px, y_px, s, size=12, color="black", anchor="start"):
        self._parts.append(
            f'<text x="{x_px:.2f}" y="{y_px:.2f}" font-size="{size}" '
            f'fill="{color}" text-anchor="{anchor}" '
            f'font-family="sans-serif">{s}</text>'
        )

    def axes(self, xlabel="", ylabel=""):
        m = self.margin
        self._parts.append(
            f'<rect x="{m}" y="{m}" width="{self.width - 2 * m}" '
            f'height="{self.height - 2 * m}" fill="none" stroke="#888"/>'
        )
        for frac in (0.0, 0.5, 1.0):
            xv = self._xlim[0] + frac * (self._xlim[1] - self._xlim[0])
            yv = self._ylim[0] + frac * (self._ylim[1] - self._ylim[0])
            self.text(self.px(xv), self.height - m + 16, f"{xv:.3g}", 10,
                      anchor="middle")
            self.text(m - 6, self.py(yv) + 4, f"{yv:.3g}", 10, anchor="end")
        if xlabel:
            self.text(self.width / 2, self.height - 8, xlabel, anchor="middle")
        if ylabel:
            self.text(12, self.height / 2, ylabel, anchor="middle")

    def to_svg(self) -> str:
        body = "\n".join(self._parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>\n'
            f"{body}\n</svg>\n"
        )

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_svg())


def _shade(frac) -> str:
    """0 -> white, 1 -> dark blue."""
    frac = min(max(frac, 0.0), 1.0)
    level = int(round(255 * (1.0 - frac)))
    return f"rgb({level},{level},{min(255, level + 60)})"


def trajectory_svg(states, reference, obstacles=(), d_min=None,
                   target_path=None) -> SvgCanvas:
    """Executed path against its reference, with obstacle discs."""
    states = np.asarray(states, dtype=float)
    reference = np.asarray(reference, dtype=float)
    xs = np.concatenate([states[:, 0], reference[:, 0]])
    ys = np.concatenate([states[:, 1], reference[:, 1]])
    pad = 0.5 + (d_min or 0.0)
    canvas = SvgCanvas()
    canvas.set_limits((xs.min() - pad, xs.max() + pad), (ys.min() - pad, ys.max() + pad))
    canvas.axes("p_x [m]", "p_y [m]")
    for ox, oy in obstacles:
        if d_min:
            canvas.circle(ox, oy, d_min, color="#c00", fill="#fdd")
        canvas.circle(ox, oy, 0.05, color="#c00", fill="#c00")
    if target_path is not None:
        tp = np.asarray(target_path, dtype=float)
        canvas.polyline(tp[:, 0], tp[:, 1], color="#0a0", width=1.0, dash="2,3")
    canvas.polyline(reference[:, 0], reference[:, 1], color="#999", width=1.0,
                    dash="4,3")
    canvas.polyline(states[:, 0], states[:, 1], color="#06c", width=2.0)
    canvas.text(canvas.margin + 4, canvas.margin + 14, "executed", color="#06c")
    canvas.text(canvas.margin + 4, canvas.margin + 28, "reference", color="#999")
    return canvas


def heatmap_svg(counts, totals, x_edges, y_edges) -> SvgCanvas:
    """Infeasible-state density per position cell; white means none."""
    counts = np.asarray(counts, dtype=float)
    peak = counts.max()
    canvas = SvgCanvas()
    canvas.set_limits((x_edges[0], x_edges[-1]), (y_edges[0], y_edges[-1]))
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            frac = counts[i, j] / peak if peak > 0 else 0.0
            canvas.cell(x_edges[i], x_edges[i + 1], y_edges[j], y_edges[j + 1],
                        _shade(frac))
    canvas.axes("p_x [m]", "p_y [m]")
    # legend: min and max of the color scale
    m = canvas.margin
    for k, frac in enumerate((0.0, 0.25, 0.5, 0.75, 1.0)):
        canvas.rect_px(canvas.width - m + 8, m + 20 * k, 14, 14, _shade(frac),
                       stroke="#888")
    canvas.text(canvas.width - m + 8, m - 6, "0", 10)
    canvas.text(canvas.width - m + 8, m + 20 * 5 + 8, f"{int(peak)}", 10)
    return canvas


def phase_svg(states, spec: SafetyIndexSpec, center=None) -> SvgCanvas:
    """Trajectory in the (d, ddot) plane with the index zero level set."""
    states = np.asarray(states, dtype=float)
    if center is None:
        center = spec.centers[0]
    g = safety.geometry(states, center)
    d, ddot = np.asarray(g.d), np.asarray(g.ddot)
    d_hi = max(d.max() * 1.1, spec.d_min * 2.5)
    dd_span = max(1.0, np.abs(ddot).max() * 1.2)
    canvas = SvgCanvas()
    canvas.set_limits((0.0, d_hi), (-dd_span, dd_span))
    canvas.axes("d [m]", "d rate [m/s]")

    # zero level set of phi as a curve ddot(d) where alpha2 > 0
    if spec.alpha2 > 0:
        ds = np.linspace(0.05 * spec.d_min, d_hi, 200)
        if spec.kind == safety.COLLISION:
            dd = (spec.d_min**spec.alpha1 - ds**spec.alpha1 + spec.beta) / spec.alpha2
        else:
            lo, hi = ds - spec.d_min, ds - spec.d_max
            p0s = np.sign(lo) * np.abs(lo) ** spec.alpha1 * np.sign(hi) * np.abs(hi) ** spec.alpha1
            dd = -(p0s + spec.beta) / (spec.alpha2 * (ds + spec.d_min + spec.d_max))
        keep = np.abs(dd) <= dd_span
        if keep.any():
            canvas.polyline(ds[keep], dd[keep], color="#c00", width=1.2, dash="5,3")
    canvas.polyline([spec.d_min, spec.d_min], [-dd_span, dd_span], color="#c00",
                    width=1.0)
    if spec.kind == safety.FOLLOWING and spec.d_max:
        canvas.polyline([spec.d_max, spec.d_max], [-dd_span, dd_span],
                        color="#c00", width=1.0)
    canvas.polyline(d, ddot, color="#06c", width=2.0)
    canvas.text(canvas.margin + 4, canvas.margin + 14, "trajectory", color="#06c")
    canvas.text(canvas.margin + 4, canvas.margin + 28, "index boundary", color="#c00")
    return canvas
