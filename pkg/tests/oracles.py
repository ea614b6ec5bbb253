"""Brute-force reference implementations, written independently of the package.

They enumerate everything and share no code with ``modtopo``, so agreement
is evidence rather than a tautology.
"""

import itertools
import math

import numpy as np


def flat_torus_distance(P, Q, lx=1.0, ly=1.0):
    """Continuum distance on the flat torus: nearest of the 9 lattice translates."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    best = np.full((len(P), len(Q)), np.inf)
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            shift = np.array([a * lx, b * ly])
            d = np.sqrt((((P[:, None, :] - Q[None, :, :] - shift)) ** 2).sum(-1))
            best = np.minimum(best, d)
    return best


def _dis(pairs, dx, dy):
    worst = 0.0
    for (i, j), (k, l) in itertools.product(pairs, repeat=2):
        worst = max(worst, abs(dx[i][k] - dy[j][l]))
    return worst


def gh_brute(dx, dy):
    """Half the least distortion over every subset of X x Y that is a correspondence."""
    nx, ny = len(dx), len(dy)
    cells = [(i, j) for i in range(nx) for j in range(ny)]
    best = math.inf
    for mask in range(1, 1 << len(cells)):
        pairs = [c for b, c in enumerate(cells) if mask >> b & 1]
        if {i for i, _ in pairs} != set(range(nx)) or {j for _, j in pairs} != set(range(ny)):
            continue
        best = min(best, _dis(pairs, dx, dy))
    return best / 2


def _one_way(dx, dy):
    nx, ny = len(dx), len(dy)
    best = math.inf
    for f in itertools.product(range(ny), repeat=nx):
        worst = max((abs(dx[a][b] - dy[f[a]][f[b]]) for a in range(nx) for b in range(nx)),
                    default=0.0)
        best = min(best, worst)
    return best


def eps_brute(dx, dy):
    return max(_one_way(dx, dy), _one_way(dy, dx))


def lip_brute(dx, dy):
    n = len(dx)
    if n != len(dy):
        return math.inf
    if n == 1:
        return 0.0
    best = math.inf
    for p in itertools.permutations(range(n)):
        worst = max(abs(math.log(dy[p[a]][p[b]] / dx[a][b]))
                    for a in range(n) for b in range(n) if a != b)
        best = min(best, worst)
    return best


def shifted_fourier(coeffs, t, lx=1.0, ly=1.0):
    """Coefficients of ``x -> phi(x + t)`` under the half-plane cos/sin convention.

    Only cosine terms (upper half-plane keys) are accepted on input.
    """
    out = {}
    for (p, q), c in coeffs.items():
        assert p > 0 or (p == 0 and q >= 0)
        ph = 2 * math.pi * (p * t[0] / lx + q * t[1] / ly)
        out[(p, q)] = out.get((p, q), 0.0) + c * math.cos(ph)
        if (p, q) != (0, 0):
            # cos(a + ph) = cos a cos ph - sin a sin ph, and sin a sits at (-p, -q)
            out[(-p, -q)] = out.get((-p, -q), 0.0) - c * math.sin(ph)
    return out


def random_cloud_matrix(rng, n, dim=2):
    pts = rng.uniform(0, 1, size=(n, dim))
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    return (d + d.T) / 2
