"""Distances between Riemannian metrics, computed on finite samples.

Gromov-Hausdorff, epsilon-isometry, Lipschitz and smooth-Lipschitz
distances on finite metric spaces and discretized tori and spheres, plus
checks of the inequalities relating them.
"""

from .bilipschitz import lip_bound, lip_exact
from .correspondence import gh_bound, gh_exact
from .eps_isometry import eps_bound, eps_exact
from .metric_core import FiniteMetricSpace, Tolerance, validate
from .smooth_lipschitz import sl_bound

__version__ = "0.1.0"

__all__ = ["FiniteMetricSpace", "Tolerance", "validate", "gh_exact", "gh_bound",
           "eps_exact", "eps_bound", "lip_exact", "lip_bound", "sl_bound"]
