"""Adaptive Simpson quadrature."""
from __future__ import annotations

from typing import Callable

ROUNDING = 64 * 2.220446049250313e-16


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 40) -> float:
    """Integral of ``f`` over [a, b] to absolute tolerance ``tol``.

    Each panel is accepted once |S_left + S_right - S_whole| <= 15 tol_panel
    (the tolerance halves with every split); accepted panels carry the
    Richardson correction.  A panel whose refinement changes it by no more
    than rounding noise is accepted too, otherwise the halved tolerances
    would fall below double precision near a steep endpoint.  Panels still
    unresolved at ``max_depth`` are accepted as they are.
    """
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        diff = left + right - s
        noise = ROUNDING * (abs(left) + abs(right))
        if depth >= max_depth or abs(diff) <= max(15.0 * eps, noise):
            total += left + right + diff / 15.0
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return total
