"""Render figure analogues from the simulation toolkit's artifacts.

Strictly read-only over the documented CSV/JSON schemas: nothing here
recomputes dynamics, so a figure can always be traced back to the exact
artifact set that produced it.
"""

from .figures import FIGURE_IDS, FigureSpec, render, spec_for
from .io import ArtifactError

__all__ = ["ArtifactError", "FIGURE_IDS", "FigureSpec", "render", "spec_for"]
