"""Figure 1 reproduction: the band between the two universal bounds.

Panels A-C show both bounds against dimensionless time (``pt`` when
``q/p < 1``, otherwise ``qt``) on ``[0, 8]`` with the band shaded; panel D
shows the half-life ratio against ``q/p`` with its large-``q/p`` asymptote.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import analytic  # noqa: E402
from .analytic import BassParams  # noqa: E402
from .bounds import gap_metrics  # noqa: E402

__all__ = ["PANEL_RATIOS", "PanelData", "RatioData", "band_panel", "ratio_panel", "render_figure1", "STYLE"]

PANEL_RATIOS = {"A": 0.1, "B": 10.0, "C": 100.0}
X_MAX = 8.0

STYLE = {
    "font.family": "serif",
    "font.size": 10,
    "axes.labelsize": 11,
    "axes.linewidth": 0.8,
    "legend.fontsize": 9,
    "legend.frameon": False,
    "lines.linewidth": 1.6,
    "svg.hashsalt": "bassnet",
    "svg.fonttype": "none",
}
UPPER_COLOR = "#1f77b4"
LOWER_COLOR = "#ff7f0e"


@dataclass
class PanelData:
    label: str
    lam: float
    params: BassParams
    scale: str  # "pt" or "qt"
    x: np.ndarray
    t: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.upper - self.lower


@dataclass
class RatioData:
    lam: np.ndarray
    ratio: np.ndarray
    asymptotic: np.ndarray  # NaN where undefined (q/p <= 1)

    @property
    def relative_deviation(self) -> np.ndarray:
        return np.abs(self.ratio - self.asymptotic) / self.ratio


def band_panel(label: str, lam: float, p: float = 0.01, points: int = 401) -> PanelData:
    bp = BassParams(p, lam * p)
    scale = "pt" if lam < 1 else "qt"
    rate = bp.p if scale == "pt" else bp.q
    x = np.linspace(0.0, X_MAX, points)
    t = x / rate
    return PanelData(label, lam, bp, scale, x, t, analytic.f_two_node(t, bp), analytic.f_bass(t, bp))


def ratio_panel(p: float = 0.01, points: int = 61, lam_max: float = 1e3) -> RatioData:
    lams = np.logspace(0.0, np.log10(lam_max), points)
    ratio = np.empty(points)
    asym = np.full(points, np.nan)
    for i, lam in enumerate(lams):
        g = gap_metrics(BassParams(p, lam * p))
        ratio[i] = g.ratio
        if g.asymptotic is not None:
            asym[i] = g.asymptotic
    return RatioData(lams, ratio, asym)


def _finish(ax):
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    ax.tick_params(direction="out", length=3, width=0.7)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_band(panel: PanelData, path) -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        ax.fill_between(panel.x, panel.lower, panel.upper, color="0.85", lw=0)
        ax.plot(panel.x, panel.upper, color=UPPER_COLOR, label=r"$f_{\rm Bass}$")
        ax.plot(panel.x, panel.lower, color=LOWER_COLOR, ls="--", label=r"$f_{M=2}^{\rm hom}$")
        ax.set_xlim(0, X_MAX)
        ax.set_ylim(0, 1)
        ax.set_xlabel(f"${panel.scale[0]}\\,t$")
        ax.set_ylabel("$f$")
        ax.set_title(f"({panel.label})  $q/p = {panel.lam:g}$", loc="left")
        ax.legend(loc="upper left")
        _finish(ax)
        _save(fig, path)


def plot_ratio(data: RatioData, path) -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        ax.plot(data.lam, data.ratio, color=UPPER_COLOR, label="exact")
        ok = np.isfinite(data.asymptotic)
        ax.plot(data.lam[ok], data.asymptotic[ok], color="k", ls="--", label="asymptotic")
        ax.set_xscale("log")
        ax.set_xlim(data.lam[0], data.lam[-1])
        ax.set_ylim(0, 1.05)
        ax.set_xlabel("$q/p$")
        ax.set_ylabel(r"$T^{1/2}_{\rm Bass} / T^{1/2}_{M=2}$")
        ax.set_title("(D)", loc="left")
        ax.legend(loc="upper right")
        _finish(ax)
        _save(fig, path)


def render_figure1(outdir, p: float = 0.01, points: int = 401, ratio_points: int = 61):
    """Write ``figure1_{A,B,C,D}.svg``; return the panel data for the CSV writers."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    panels = {k: band_panel(k, lam, p, points) for k, lam in PANEL_RATIOS.items()}
    for k, panel in panels.items():
        plot_band(panel, outdir / f"figure1_{k}.svg")
    ratio = ratio_panel(p, ratio_points)
    plot_ratio(ratio, outdir / "figure1_D.svg")
    return panels, ratio
