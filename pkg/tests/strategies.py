import numpy as np
from hypothesis import strategies as st

from modtopo.metric_core import from_points


@st.composite
def spaces(draw, min_n=1, max_n=4):
    """Euclidean point clouds in R^1..R^3 with well-separated points."""
    n = draw(st.integers(min_n, max_n))
    dim = draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    while True:
        pts = rng.uniform(0.0, 1.0, size=(n, dim))
        d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
        if n == 1 or d[~np.eye(n, dtype=bool)].min() > 1e-3:
            return from_points(pts)
