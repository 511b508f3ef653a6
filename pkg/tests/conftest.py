import math

import numpy as np
import pytest

from tgfield.alpha_profile import FieldParams, solve_alpha

# (a, alpha0) pairs whose profiles are regular on (-0.5, 0.5)
ADMISSIBLE = [(-1.5, 1.0), (-1.0, 1.0), (-0.75, 1.0), (-0.25, 1.0), (0.5, 1.0)]


@pytest.fixture(scope="session")
def profiles():
    return {a: solve_alpha(FieldParams(a, 0.3), 0.0, al0, (-0.5, 0.5))
            for a, al0 in ADMISSIBLE}


@pytest.fixture(scope="session")
def sphere_profile():
    return solve_alpha(FieldParams(-1.0, 0.0), math.pi / 2, math.pi / 2,
                       (0.01, math.pi - 0.01))


@pytest.fixture(scope="session")
def wide_profile():
    return solve_alpha(FieldParams(-0.75, 0.3), 0.0, 1.0, (-4.0, 4.0))


def generic_christoffel(g, x, h=1e-5):
    """Gamma^k_ij of a metric given as a callable x -> (n, n) matrix, by central differences."""
    x = np.asarray(x, float)
    n = len(x)
    dg = np.empty((n, n, n))  # dg[l, i, j] = d_l g_ij
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        dg[l] = (g(x + e) - g(x - e)) / (2 * h)
    ginv = np.linalg.inv(g(x))
    gam = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                gam[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[i, l, j] + dg[j, l, i] - dg[l, i, j]) for l in range(n))
    return gam
