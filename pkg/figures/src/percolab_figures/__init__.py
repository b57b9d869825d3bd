"""Figures from percolab CSV/JSON outputs (public contracts only)."""

from .io import FormatError, read_growth, read_phase_curve
from .plots import plot_cluster_scatter, plot_growth_loglog, plot_phase_curve

__version__ = "0.1.0"
