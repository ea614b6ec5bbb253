"""Shared pieces of the seeded local searches."""

from __future__ import annotations

import math

import numpy as np

# Temperature cycle: geometric cooling from T0 to T0 * FLOOR over CYCLE
# iterations, then reheat. The schedule does not depend on the budget, so a
# run with a larger budget replays a shorter run as its prefix and the
# best-so-far value can only improve.
CYCLE = 2000
FLOOR = 1e-3


def temperature(it: int, t0: float) -> float:
    k = it % CYCLE
    return t0 * FLOOR ** (k / (CYCLE - 1))


def accept(delta: float, temp: float, u: float) -> bool:
    if delta <= 0:
        return True
    if temp <= 0:
        return False
    return u < math.exp(-delta / temp)


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for ``(seed, stream...)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**63 - 1), *stream]))


def start_map(n_from: int, n_to: int) -> np.ndarray:
    """Deterministic start ``i -> i mod n_to``; the identity when sizes agree."""
    return np.arange(n_from) % n_to
