"""Figure scripts for the spinbath simulator.

Consumes only the documented CSV/JSON outputs of the simulation package
(decay_*.csv, sweep_summary.csv, gpb_summary.csv); no simulation code is
imported.
"""

from .figures import FIGURE_IDS, FigureSpec, build_spec, render

__all__ = ["FIGURE_IDS", "FigureSpec", "build_spec", "render"]
