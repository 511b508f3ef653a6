import math

import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from tgfield.quadrature import adaptive_simpson


def test_sine():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)


def test_cubic_is_exact():
    f = lambda x: 3 * x**3 - x + 2
    assert adaptive_simpson(f, -1.0, 2.0, tol=1.0) == pytest.approx(3 * 15 / 4 - 1.5 + 6, abs=1e-13)


def test_reversed_and_empty():
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(1 - math.e, abs=1e-10)
    assert adaptive_simpson(math.exp, 0.5, 0.5) == 0.0


@given(st.floats(0.1, 5.0), st.floats(0.0, 2.0), st.floats(0.01, 3.0))
def test_against_reference(k, lo, width):
    f = lambda x: math.cos(k * x) * math.exp(-x)
    ref = quad(f, lo, lo + width, epsabs=1e-13, epsrel=1e-13)[0]
    assert adaptive_simpson(f, lo, lo + width, tol=1e-10) == pytest.approx(ref, abs=1e-10)


def test_near_singular_endpoint():
    # sqrt blow-up just outside the interval stays finite and accurate
    f = lambda x: 1 / math.sqrt(1 - x)
    ref = 2 * (1 - math.sqrt(1e-6))
    assert adaptive_simpson(f, 0.0, 1 - 1e-6, tol=1e-10) == pytest.approx(ref, abs=1e-8)
