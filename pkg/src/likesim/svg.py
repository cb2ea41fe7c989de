"""Minimal self-contained SVG charts for the analysis report.

Plain paths, axes, and text labels only; no external assets.  Output is
deliberately simple so structural golden tests (element counts) stay
stable.
"""

from __future__ import annotations

import numpy as np

from .stats import AnalysisReport

_COLORS = {"strategic": "#e07a1f", "baseline": "#222222", "accent": "#2a6fb0"}


class _Panel:
    """Maps data coordinates to pixel coordinates inside one plot frame."""

    def __init__(self, x0, y0, width, height, xlim, ylim):
        self.x0, self.y0 = x0, y0
        self.width, self.height = width, height
        self.xlim, self.ylim = xlim, ylim

    def px(self, x: float) -> float:
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * self.width

    def py(self, y: float) -> float:
        lo, hi = self.ylim
        return self.y0 + self.height - (y - lo) / (hi - lo) * self.height

    def frame(self, xlabel: str, ylabel: str, title: str) -> list[str]:
        e = [
            f'<rect x="{self.x0}" y="{self.y0}" width="{self.width}" '
            f'height="{self.height}" fill="none" stroke="#444" stroke-width="1"/>',
            f'<text x="{self.x0 + self.width / 2:.1f}" y="{self.y0 - 6:.1f}" '
            f'text-anchor="middle" font-size="12">{title}</text>',
            f'<text x="{self.x0 + self.width / 2:.1f}" '
            f'y="{self.y0 + self.height + 28:.1f}" text-anchor="middle" '
            f'font-size="11">{xlabel}</text>',
            f'<text x="{self.x0 - 34:.1f}" y="{self.y0 + self.height / 2:.1f}" '
            f'text-anchor="middle" font-size="11" transform="rotate(-90 '
            f'{self.x0 - 34:.1f} {self.y0 + self.height / 2:.1f})">{ylabel}</text>',
        ]
        for frac in (0.0, 0.5, 1.0):
            xv = self.xlim[0] + frac * (self.xlim[1] - self.xlim[0])
            yv = self.ylim[0] + frac * (self.ylim[1] - self.ylim[0])
            e.append(
                f'<text x="{self.px(xv):.1f}" y="{self.y0 + self.height + 14:.1f}" '
                f'text-anchor="middle" font-size="9">{_tick(xv)}</text>'
            )
            e.append(
                f'<text x="{self.x0 - 4:.1f}" y="{self.py(yv) + 3:.1f}" '
                f'text-anchor="end" font-size="9">{_tick(yv)}</text>'
            )
        return e

    def polyline(self, xs, ys, color: str, dash: str = "") -> str:
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        return (
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"{dash_attr}/>'
        )

    def vline(self, x: float, color: str) -> str:
        return (
            f'<line x1="{self.px(x):.2f}" y1="{self.y0}" x2="{self.px(x):.2f}" '
            f'y2="{self.y0 + self.height}" stroke="{color}" stroke-width="1" '
            f'stroke-dasharray="4,3"/>'
        )

    def circle(self, x: float, y: float, color: str, radius: float = 2.0) -> str:
        return (
            f'<circle cx="{self.px(x):.2f}" cy="{self.py(y):.2f}" '
            f'r="{radius}" fill="{color}"/>'
        )

    def bar(self, x_lo: float, x_hi: float, y: float, color: str) -> str:
        y_base = self.py(max(self.ylim[0], min(0.0, self.ylim[1])))
        y_top = self.py(y)
        top = min(y_top, y_base)
        height = abs(y_base - y_top)
        return (
            f'<rect x="{self.px(x_lo):.2f}" y="{top:.2f}" '
            f'width="{self.px(x_hi) - self.px(x_lo):.2f}" height="{height:.2f}" '
            f'fill="{color}" stroke="none"/>'
        )


def _tick(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 100 or abs(v) < 0.01:
        return f"{v:.1e}"
    return f"{v:.3g}"


def _document(width: int, height: int, elements: list[str]) -> str:
    body = "\n".join(elements)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f"{body}\n</svg>\n"
    )


def _ylim_pad(values) -> tuple[float, float]:
    hi = max(float(np.max(values)), 1e-12)
    return 0.0, hi * 1.08


def _legend(x: float, y: float, entries: list[tuple[str, str]]) -> list[str]:
    out = []
    for k, (label, color) in enumerate(entries):
        yy = y + 14 * k
        out.append(
            f'<line x1="{x}" y1="{yy}" x2="{x + 18}" y2="{yy}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{x + 24}" y="{yy + 4}" font-size="10">{label}</text>'
        )
    return out


def fig_give_rates(report: AnalysisReport) -> str:
    """Give-rate densities for the strategic and baseline populations."""
    hs, hb = report.give_hist_strategic, report.give_hist_baseline
    panel = _Panel(
        60, 30, 420, 300,
        (float(hs.edges[0]), float(hs.edges[-1])),
        _ylim_pad(np.maximum(hs.counts, hb.counts)),
    )
    e = panel.frame("give rate", "density", "Give-rate distributions")
    e.append(panel.polyline(hb.centers, hb.counts, _COLORS["baseline"]))
    e.append(panel.polyline(hs.centers, hs.counts, _COLORS["strategic"]))
    e.append(panel.vline(report.give_mean_baseline, _COLORS["baseline"]))
    e.append(panel.vline(report.give_mean_strategic, _COLORS["strategic"]))
    e.extend(_legend(340, 46, [
        ("strategic", _COLORS["strategic"]), ("random", _COLORS["baseline"]),
    ]))
    return _document(520, 380, e)


def fig_centrality(report: AnalysisReport) -> str:
    """Four centrality predictors of give rate: binned means plus raw fit."""
    raw = {name: fit for name, binned, fit in report.regressions if not binned}
    binned = {name: fit for name, is_b, fit in report.regressions if is_b}
    names = ["degree", "betweenness", "closeness", "eigenvector"]
    layout = [(60, 40), (360, 40), (60, 300), (360, 300)]
    elements: list[str] = []
    for name, (x0, y0) in zip(names, layout):
        bx, by = report.binned_points[name]
        fit = raw[name]
        x_lo, x_hi = float(np.min(bx)), float(np.max(bx))
        if x_lo == x_hi:
            x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
        pad = (x_hi - x_lo) * 0.06
        panel = _Panel(
            x0, y0, 230, 180,
            (x_lo - pad, x_hi + pad),
            _ylim_pad(by),
        )
        elements.extend(panel.frame(name, "give rate", f"{name} vs give rate"))
        for xv, yv in zip(bx, by):
            elements.append(panel.circle(float(xv), float(yv), _COLORS["strategic"]))
        xs = np.linspace(panel.xlim[0], panel.xlim[1], 2)
        elements.append(
            panel.polyline(xs, fit.intercept + fit.slope * xs, _COLORS["accent"])
        )
        elements.append(
            f'<text x="{panel.x0 + 4}" y="{panel.y0 + 12}" font-size="9">'
            f"R2={fit.r_squared:.3f} (binned {binned[name].r_squared:.3f})</text>"
        )
    return _document(660, 540, elements)


def fig_deviations(report: AnalysisReport) -> str:
    """Delta and epsilon deviation densities with detected modes."""
    elements: list[str] = []
    for (h, modes, label), (x0, y0) in zip(
        (
            (report.delta_hist, report.delta_modes, "delta"),
            (report.epsilon_hist, report.epsilon_modes, "epsilon"),
        ),
        ((60, 30), (380, 30)),
    ):
        panel = _Panel(
            x0, y0, 260, 280,
            (float(h.edges[0]), float(h.edges[-1])),
            _ylim_pad(h.counts),
        )
        elements.extend(panel.frame(label, "density", f"{label} deviations"))
        elements.append(panel.polyline(h.centers, h.counts, _COLORS["strategic"]))
        for center, _density in modes[:4]:
            elements.append(panel.vline(center, _COLORS["accent"]))
    return _document(700, 370, elements)


def fig_clustering(report: AnalysisReport) -> str:
    """Per-bin percent difference of clustering densities, random to strategic."""
    diffs = report.clustering_percent_difference
    h = report.clustering_hist_strategic
    defined = [(k, d) for k, d in enumerate(diffs) if d is not None]
    values = [d for _, d in defined] or [0.0]
    lo = min(min(values), 0.0) * 1.1 - 1e-9
    hi = max(max(values), 0.0) * 1.1 + 1e-9
    panel = _Panel(70, 30, 430, 300, (float(h.edges[0]), float(h.edges[-1])), (lo, hi))
    elements = panel.frame(
        "mean clustering", "percent difference", "Clustering shift, random to strategic"
    )
    for k, d in defined:
        color = _COLORS["strategic"] if d >= 0 else _COLORS["accent"]
        elements.append(panel.bar(float(h.edges[k]), float(h.edges[k + 1]), d, color))
    elements.append(
        panel.polyline([panel.xlim[0], panel.xlim[1]], [0.0, 0.0], "#444")
    )
    return _document(560, 380, elements)


def fig_diameter(report: AnalysisReport) -> str:
    """Mean prestige per network diameter."""
    table = report.diameter_table
    if not table:
        return _document(420, 320, ['<text x="20" y="20">no data</text>'])
    diams = [row[0] for row in table]
    means = [row[2] for row in table]
    lo = min(means)
    hi = max(means)
    pad = max((hi - lo) * 0.2, 1e-6)
    panel = _Panel(
        70, 30, 300, 240,
        (min(diams) - 0.6, max(diams) + 0.6),
        (lo - pad, hi + pad),
    )
    elements = panel.frame("diameter", "mean prestige", "Prestige by diameter")
    for d, cnt, mean, _std in table:
        elements.append(panel.bar(d - 0.35, d + 0.35, mean, _COLORS["accent"]))
        elements.append(
            f'<text x="{panel.px(d):.1f}" y="{panel.py(mean) - 4:.1f}" '
            f'text-anchor="middle" font-size="9">n={cnt}</text>'
        )
    return _document(440, 330, elements)


FIGURES = {
    "fig1_give_rates.svg": fig_give_rates,
    "fig2_centrality.svg": fig_centrality,
    "fig3_deviations.svg": fig_deviations,
    "fig4_clustering.svg": fig_clustering,
    "fig5_diameter.svg": fig_diameter,
}
