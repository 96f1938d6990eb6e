"""plotkit: regenerate the reference figures from orbitlab recipe CSVs."""

__version__ = "0.1.0"

from .figures import FIGURE_IDS, FigureSpec, PlotkitError, build_figure, plot
