"""Fixed-step classical Runge-Kutta for batches of trajectories."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class RK4Result:
    s: np.ndarray          # (n+1,)
    y: np.ndarray          # (n+1, m, d); NaN after a row stops
    last: np.ndarray       # (m,) index of the last valid sample per row
    truncated: np.ndarray  # (m,) bool


def rk4_batch(
    rhs: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    length: float,
    step: float,
    inside: Callable[[np.ndarray], np.ndarray],
) -> RK4Result:
    """Integrate the autonomous system y' = rhs(y) for every row of ``y0``.

    The step is shrunk to ``length / ceil(length / step)`` so the last sample
    lands on ``length`` exactly.  A row stops (and is flagged truncated) as
    soon as any stage leaves the region described by ``inside`` or produces
    a non-finite slope; its remaining samples are NaN.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if not length >= 0:
        raise ValueError("length must be non-negative")
    y0 = np.atleast_2d(np.asarray(y0, dtype=float))
    n = max(1, math.ceil(length / step - 1e-12)) if length > 0 else 0
    h = length / n if n else 0.0
    m, d = y0.shape
    out = np.full((n + 1, m, d), np.nan)
    out[0] = y0
    alive = inside(y0).astype(bool)
    truncated = ~alive
    last = np.zeros(m, dtype=int)
    y = y0.copy()
    for i in range(n):
        if not alive.any():
            break
        ya = y[alive]
        with np.errstate(all="ignore"):
            k1 = rhs(ya)
            y2 = ya + 0.5 * h * k1
            k2 = rhs(y2)
            y3 = ya + 0.5 * h * k2
            k3 = rhs(y3)
            y4 = ya + h * k3
            k4 = rhs(y4)
            ynew = ya + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ok = inside(y2) & inside(y3) & inside(y4) & inside(ynew)
        ok &= np.isfinite(ynew).all(axis=1)
        idx = np.flatnonzero(alive)
        good, bad = idx[ok], idx[~ok]
        y[good] = ynew[ok]
        out[i + 1, good] = ynew[ok]
        last[good] = i + 1
        alive[bad] = False
        truncated[bad] = True
    return RK4Result(s=h * np.arange(n + 1), y=out, last=last, truncated=truncated)
