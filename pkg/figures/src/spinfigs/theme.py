"""Single place for figure styling so every figure renders identically."""
import matplotlib

matplotlib.use("svg")

import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "figure.figsize": (4.8, 3.4),
    "figure.dpi": 120,
    "font.size": 9,
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.25,
    "lines.linewidth": 1.2,
    "legend.fontsize": 8,
    "legend.framealpha": 0.8,
    "svg.hashsalt": "spinfigs",  # deterministic svg ids
    "svg.fonttype": "none",      # keep text as text (greppable, smaller)
}

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f"]

EQUILIBRIUM_LINE = -0.05   # thermal long-time value
THRESHOLD_LINE = -0.04     # stuck threshold separating superweak dynamics
FGR_GUIDE = 0.95           # tau_rel ~ 0.95 / lambda^2 guide


def apply():
    plt.rcParams.update(RC)


def color(i: int) -> str:
    return PALETTE[i % len(PALETTE)]
