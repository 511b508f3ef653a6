"""The profile ODE  alpha'(u) = 1 - (a+1)/cos(alpha)  and its curvature identities.

A solved profile alpha(u) defines the warp factor f = sin(alpha(u)); the
resulting surface has Gaussian curvature K = alpha'(u) and carries the
totally geodesic unit field with angle a*v + omega0 (see ``frame_field``).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import (
    DomainError,
    NonExistenceError,
    PoleError,
    ValidationError,
)
from .warped_metric import WarpedMetric, fd_step, gauss_curvature

EPS_COS = 1e-3
EPS_SIN = 1e-3
EPS_K = 1e-6


@dataclass(frozen=True)
class FieldParams:
    a: float
    omega0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.omega0)):
            raise ValidationError("field parameters must be finite")


def alpha_rhs(a, alpha):
    """Right-hand side 1 - (a+1)/cos(alpha); equals 1 + m/cos(alpha), m = -(a+1).

    For a = -1 the numerator vanishes identically and the value is 1 even
    where cos(alpha) = 0.
    """
    alpha = np.asarray(alpha, dtype=float)
    if a == -1.0:
        return np.ones_like(alpha)[()]
    c = np.cos(alpha)
    if np.any(c == 0.0):
        raise PoleError("cos(alpha) = 0: pole of the profile equation")
    return (1.0 - (a + 1.0) / c)[()]


def alpha_rhs_prime(a, alpha):
    """d/dalpha of :func:`alpha_rhs`."""
    alpha = np.asarray(alpha, dtype=float)
    if a == -1.0:
        return np.zeros_like(alpha)[()]
    c = np.cos(alpha)
    return (-(a + 1.0) * np.sin(alpha) / c**2)[()]


def cos_alpha_from_K(a: float, K: float) -> float:
    """cos(alpha) at a point of curvature K, i.e. (a+1)/(1-K).

    Raises NonExistenceError when |(a+1)/(1-K)| >= 1: no totally geodesic
    field with angular speed ``a`` exists at such a point.
    """
    if K == 1.0:
        raise PoleError("K = 1: cos(alpha) is undetermined")
    c = (a + 1.0) / (1.0 - K)
    if abs(c) >= 1.0:
        raise NonExistenceError(
            f"|K-1| = {abs(K - 1.0):g} <= |a+1| = {abs(a + 1.0):g}: "
            "no totally geodesic unit field with this angular speed")
    return c


class _ProfileMixin:
    """Metric, curvature and evaluation helpers shared by profile types."""

    params: FieldParams
    u_interval: tuple[float, float]

    def contains(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        lo, hi = self.u_interval
        return (u > lo) & (u < hi)

    def check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if not np.all(self.contains(u)):
            raise DomainError(
                f"u outside profile validity interval {self.u_interval}")
        return u

    def metric(self) -> WarpedMetric:
        """Warped metric with f = sin(alpha(u)) and analytic f', f''."""
        def f(u):
            return np.sin(self._alpha(u))

        def fp(u):
            return np.cos(self._alpha(u)) * self._dalpha(u)

        def fpp(u):
            al = self._alpha(u)
            d1 = self._dalpha(u)
            return -np.sin(al) * d1**2 + np.cos(al) * self._d2alpha(u)

        return WarpedMetric(f=f, f_prime=fp, f_double_prime=fpp,
                            domain=self.u_interval,
                            name=f"profile a={self.params.a:g}")

    def alpha(self, u):
        return self._alpha(self.check(u))

    def dalpha(self, u):
        return self._dalpha(self.check(u))

    def d2alpha(self, u):
        return self._d2alpha(self.check(u))

    def gauss_curvature(self, u):
        return gauss_curvature(self.metric(), u)


@dataclass(frozen=True)
class AlphaProfile(_ProfileMixin):
    """Dense solution of the profile ODE on ``u_interval``.

    ``samples`` has columns (u, alpha, alpha') at the solver's accepted
    steps.  ``alpha()`` evaluates the cubic Hermite interpolant; ``dalpha()``
    evaluates the ODE right-hand side on it (analytic mode) while
    ``hermite_dalpha()`` differentiates the interpolant itself.
    """

    params: FieldParams
    u0: float
    alpha0: float
    u_interval: tuple[float, float]
    samples: np.ndarray
    truncated_low: bool = False
    truncated_high: bool = False
    stop_reasons: tuple[Optional[str], Optional[str]] = (None, None)
    interpolant: CubicHermiteSpline = field(default=None, compare=False, repr=False)

    @property
    def truncated(self) -> bool:
        return self.truncated_low or self.truncated_high

    def _alpha(self, u):
        return self.interpolant(u)[()]

    def _dalpha(self, u):
        return alpha_rhs(self.params.a, self._alpha(u))

    def _d2alpha(self, u):
        al = self._alpha(u)
        return alpha_rhs_prime(self.params.a, al) * alpha_rhs(self.params.a, al)

    def hermite_dalpha(self, u):
        return self.interpolant(self.check(u), 1)[()]

    def perturbed(self, amplitude: float, frequency: float) -> "PerturbedProfile":
        """alpha(u) + amplitude*sin(frequency*u); no longer an ODE solution."""
        return PerturbedProfile(self, amplitude, frequency)

    def to_csv(self, path) -> None:
        u, al, dal = self.samples.T
        K = self.gauss_curvature(np.clip(u, *_inner(self.u_interval)))
        write_csv(path, ["u", "alpha", "alpha_prime", "K", "cos_alpha"],
                  np.column_stack([u, al, dal, K, np.cos(al)]))


@dataclass(frozen=True)
class PerturbedProfile(_ProfileMixin):
    base: AlphaProfile
    amplitude: float
    frequency: float

    @property
    def params(self) -> FieldParams:
        return self.base.params

    @property
    def u_interval(self) -> tuple[float, float]:
        return self.base.u_interval

    def _alpha(self, u):
        return self.base._alpha(u) + self.amplitude * np.sin(self.frequency * u)

    def _dalpha(self, u):
        return (self.base._dalpha(u)
                + self.amplitude * self.frequency * np.cos(self.frequency * u))

    def _d2alpha(self, u):
        return (self.base._d2alpha(u)
                - self.amplitude * self.frequency**2 * np.sin(self.frequency * u))


def _inner(interval):
    lo, hi = interval
    return np.nextafter(lo, hi), np.nextafter(hi, lo)


def _check_initial(a, alpha0, eps_c, eps_s, eps_k):
    if a != -1.0 and abs(math.cos(alpha0)) <= eps_c:
        raise ValidationError(
            f"|cos(alpha0)| = {abs(math.cos(alpha0)):.3g} <= eps_c = {eps_c:g}")
    if abs(math.sin(alpha0)) <= eps_s:
        raise ValidationError(
            f"|sin(alpha0)| = {abs(math.sin(alpha0)):.3g} <= eps_s = {eps_s:g}")
    k0 = alpha_rhs(a, alpha0)
    if abs(k0) <= eps_k:
        raise ValidationError(
            f"|alpha'(u0)| = {abs(k0):.3g} <= eps_k = {eps_k:g} "
            "(stationary point / vanishing curvature)")


def solve_alpha(
    params: FieldParams,
    u0: float,
    alpha0: float,
    u_span: tuple[float, float],
    tol: float = 1e-10,
    *,
    eps_c: float = EPS_COS,
    eps_s: float = EPS_SIN,
    eps_k: float = EPS_K,
    max_step: float = 1e-2,
    max_dalpha: float = 1e-3,
) -> AlphaProfile:
    """Integrate the profile ODE from (u0, alpha0) across ``u_span``.

    Uses an embedded 8(5,3) Runge-Kutta pair with ``rtol = atol = tol``.
    Integration in either direction stops where |cos alpha|, |sin alpha| or
    |alpha'| reaches its guard; that side of the interval is then flagged
    as truncated.  The cos guard is inactive for a = -1, where the equation
    has no pole.

    Accepted steps are subdivided (through the solver's own high-order
    dense output) until alpha changes by at most ``max_dalpha`` between
    consecutive samples, which keeps the cubic Hermite interpolant accurate
    near the steep ends of the interval.
    """
    a = params.a
    lo, hi = u_span
    if not lo <= u0 <= hi or not lo < hi:
        raise ValidationError(f"u0={u0} must lie in u_span={u_span}")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    _check_initial(a, alpha0, eps_c, eps_s, eps_k)

    def rhs(_, y):
        return [1.0 - (a + 1.0) / math.cos(y[0])] if a != -1.0 else [1.0]

    guards = {
        "sin": lambda _, y: abs(math.sin(y[0])) - eps_s,
        "alpha_prime": lambda _, y: abs(rhs(0, y)[0]) - eps_k,
    }
    if a != -1.0:
        guards["cos"] = lambda _, y: abs(math.cos(y[0])) - eps_c
    names = list(guards)
    events = []
    for nm in names:
        ev = guards[nm]
        ev.terminal = True
        events.append(ev)

    def leg(end):
        if end == u0:
            return np.array([u0]), np.array([alpha0]), None
        sol = solve_ivp(rhs, (u0, end), [alpha0], method="DOP853", rtol=tol,
                        atol=tol, max_step=max_step, events=events,
                        dense_output=True)
        if sol.status == -1:
            raise ArithmeticError(f"profile integration failed: {sol.message}")
        reason = None
        if sol.status == 1:
            reason = next(nm for nm, te in zip(names, sol.t_events) if len(te))
        t, y = sol.t, sol.y[0]
        pieces = np.maximum(1, np.ceil(np.abs(np.diff(y)) / max_dalpha)).astype(int)
        if np.any(pieces > 1):
            tt = [t[:1]]
            for t0, t1, m in zip(t[:-1], t[1:], pieces):
                tt.append(t0 + (t1 - t0) * np.arange(1, m + 1) / m)
            tt = np.concatenate(tt)
            tt[-1] = t[-1]
            yy = sol.sol(tt)[0]
            yy[0], yy[-1] = y[0], y[-1]
            t, y = tt, yy
        return t, y, reason

    ub, ab, rb = leg(lo)
    uf, af, rf = leg(hi)
    u = np.concatenate([ub[::-1], uf[1:]])
    al = np.concatenate([ab[::-1], af[1:]])
    if len(u) < 2:
        raise ValidationError("profile collapsed to a single point")
    dal = np.asarray(alpha_rhs(a, al))
    interp = CubicHermiteSpline(u, al, dal, extrapolate=True)
    return AlphaProfile(
        params=params, u0=u0, alpha0=alpha0,
        u_interval=(float(u[0]), float(u[-1])),
        samples=np.column_stack([u, al, dal]),
        truncated_low=rb is not None, truncated_high=rf is not None,
        stop_reasons=(rb, rf), interpolant=interp,
    )


def verify_proposition(profile, n_points: int = 100, margin: float = 1e-3):
    """Max |K_metric - alpha'| over ``n_points`` interior points.

    Returns ``(curvature_residual, second_derivative_residual)`` where the
    latter checks alpha'' = -alpha'(1-alpha')tan(alpha) with alpha'' taken by
    central differences of alpha' (relative to max(1, |alpha''|)).
    """
    if n_points < 1:
        raise ValidationError("n_points must be >= 1")
    lo, hi = profile.u_interval
    pad = margin * (hi - lo)
    u = np.linspace(lo + pad, hi - pad, n_points)
    K = gauss_curvature(profile.metric(), u)
    d1 = profile.dalpha(u)
    curv_res = float(np.max(np.abs(K - d1)))
    # the stencil shrinks where alpha moves fast so it never straddles the
    # steep ends of the interval
    h = fd_step(u) / np.maximum(1.0, np.abs(d1))
    h = np.minimum(h, 0.5 * np.minimum(u - lo, hi - u))
    d2_fd = (profile.dalpha(u + h) - profile.dalpha(u - h)) / (2.0 * h)
    al = profile.alpha(u)
    d2 = -d1 * (1.0 - d1) * np.tan(al)
    d2_res = float(np.max(np.abs(d2_fd - d2) / np.maximum(1.0, np.abs(d2))))
    return curv_res, d2_res


def write_csv(path, header, rows) -> None:
    """CSV with 17 significant digits (exact float64 round trip)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.atleast_2d(rows):
            w.writerow([format(float(x), ".17g") for x in row])
