"""Surface metrics ds^2 = du^2 + f(u)^2 dv^2.

Everything here is vectorised: coordinates may be floats or numpy arrays
that broadcast against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._rk4 import rk4_batch
from .errors import (
    DerivativeUnavailableError,
    DomainError,
    SingularParallelError,
    ValidationError,
)

ScalarFn = Callable[[np.ndarray], np.ndarray]

FD_STEP = 1e-5


def fd_step(u) -> np.ndarray:
    """Central-difference step, scaled with the magnitude of the coordinate."""
    return FD_STEP * np.maximum(1.0, np.abs(u))


@dataclass(frozen=True)
class Point2:
    u: float
    v: float


@dataclass(frozen=True)
class Tangent2:
    """Components of a tangent vector in the coordinate frame (d/du, d/dv)."""

    a_u: float
    a_v: float

    def __add__(self, other: "Tangent2") -> "Tangent2":
        return Tangent2(self.a_u + other.a_u, self.a_v + other.a_v)

    def __mul__(self, c) -> "Tangent2":
        return Tangent2(c * self.a_u, c * self.a_v)

    __rmul__ = __mul__


@dataclass(frozen=True)
class WarpedMetric:
    """The metric du^2 + f(u)^2 dv^2 on the strip ``domain[0] < u < domain[1]``.

    ``f_prime`` and ``f_double_prime`` are optional; missing derivatives are
    replaced by central differences with step ``1e-5 * max(1, |u|)``.
    """

    f: ScalarFn
    f_prime: Optional[ScalarFn] = None
    f_double_prime: Optional[ScalarFn] = None
    domain: tuple[float, float] = (-math.inf, math.inf)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ValidationError(f"empty domain {self.domain}")

    # -- constructors -------------------------------------------------------
    @classmethod
    def flat(cls) -> "WarpedMetric":
        return cls(
            f=lambda u: np.ones_like(np.asarray(u, dtype=float)),
            f_prime=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
            f_double_prime=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
            name="flat cylinder",
        )

    @classmethod
    def sphere(cls) -> "WarpedMetric":
        return cls(f=np.sin, f_prime=np.cos,
                   f_double_prime=lambda u: -np.sin(u),
                   domain=(0.0, math.pi), name="unit sphere")

    # -- evaluation ---------------------------------------------------------
    def contains(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        lo, hi = self.domain
        return (u > lo) & (u < hi)

    def check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if not np.all(self.contains(u)):
            bad = u[~self.contains(u)] if u.ndim else u
            raise DomainError(
                f"u={np.ravel(bad)[0]!r} outside metric domain {self.domain}")
        return u

    def _fd(self, fn: ScalarFn, u: np.ndarray) -> np.ndarray:
        h = fd_step(u)
        if not (np.all(self.contains(u - h)) and np.all(self.contains(u + h))):
            raise DerivativeUnavailableError(
                "finite-difference stencil leaves the metric domain")
        return (fn(u + h) - fn(u - h)) / (2.0 * h)

    def warp(self, u) -> np.ndarray:
        return np.asarray(self.f(self.check(u)), dtype=float)

    def dwarp(self, u) -> np.ndarray:
        u = self.check(u)
        if self.f_prime is not None:
            return np.asarray(self.f_prime(u), dtype=float)
        return self._fd(self.f, u)

    def d2warp(self, u) -> np.ndarray:
        u = self.check(u)
        if self.f_double_prime is not None:
            return np.asarray(self.f_double_prime(u), dtype=float)
        if self.f_prime is not None:
            return self._fd(self.f_prime, u)
        h = fd_step(u)
        if not (np.all(self.contains(u - h)) and np.all(self.contains(u + h))):
            raise DerivativeUnavailableError(
                "finite-difference stencil leaves the metric domain")
        return (self.f(u + h) - 2.0 * self.f(u) + self.f(u - h)) / h**2

    def norm(self, p: Point2, x: Tangent2) -> np.ndarray:
        f = self.warp(p.u)
        return np.sqrt(x.a_u**2 + (f * x.a_v) ** 2)

    def inner(self, p: Point2, x: Tangent2, y: Tangent2) -> np.ndarray:
        f = self.warp(p.u)
        return x.a_u * y.a_u + f**2 * x.a_v * y.a_v


def christoffel(metric: WarpedMetric, u):
    """Return ``(G^u_vv, G^v_uv, G^v_vu)``; every other symbol vanishes."""
    f = metric.warp(u)
    fp = metric.dwarp(u)
    if np.any(f == 0):
        raise SingularParallelError("f(u) = 0: Christoffel symbols undefined")
    g_uvv = -f * fp
    g_vuv = fp / f
    return g_uvv, g_vuv, g_vuv


def gauss_curvature(metric: WarpedMetric, u) -> np.ndarray:
    """K = -f''/f."""
    f = metric.warp(u)
    if np.any(f == 0):
        raise SingularParallelError("f(u) = 0: singular parallel")
    return -metric.d2warp(u) / f


def covariant_derivative_components(metric, theta, theta_u, theta_v, x_u, x_v, u):
    """Array kernel of :func:`covariant_derivative`.

    The field is cos(theta) d/du + sin(theta)/f d/dv; ``theta_u``/``theta_v``
    are its angle partials at the evaluation points.
    """
    f = metric.warp(u)
    fp = metric.dwarp(u)
    g_uvv, g_vuv, _ = christoffel(metric, u)
    c, s = np.cos(theta), np.sin(theta)
    xi_u, xi_v = c, s / f
    dtheta = theta_u * x_u + theta_v * x_v
    d_xi_u = -s * dtheta
    d_xi_v = c * dtheta / f - s * fp / f**2 * x_u
    out_u = d_xi_u + g_uvv * x_v * xi_v
    out_v = d_xi_v + g_vuv * (x_u * xi_v + x_v * xi_u)
    return out_u, out_v


def covariant_derivative(metric: WarpedMetric, field, direction: Tangent2,
                         p: Point2) -> Tangent2:
    """Levi-Civita derivative of the unit field ``field`` along ``direction``."""
    u = metric.check(p.u)
    th = field.theta(u, p.v)
    th_u, th_v = field.partials(u, p.v, metric)
    du, dv = covariant_derivative_components(
        metric, th, th_u, th_v, direction.a_u, direction.a_v, u)
    return Tangent2(du, dv)


@dataclass(frozen=True)
class GeodesicPath:
    s: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    truncated: bool

    @property
    def end(self) -> Point2:
        return Point2(float(self.u[-1]), float(self.v[-1]))


def geodesic_integrate_2d(metric: WarpedMetric, p: Point2, x: Tangent2,
                          length: float, step: float = 1e-3) -> GeodesicPath:
    """Unit-speed geodesic from ``p`` with initial velocity ``x``.

    If the path leaves the metric domain, it is cut at the last good sample
    and ``truncated`` is set.
    """
    if not step > 0:
        raise ValidationError("step must be positive")
    speed = float(metric.norm(p, x))
    if abs(speed - 1.0) > 1e-12:
        raise ValidationError(f"initial velocity must be unit, got |x|={speed!r}")

    f, fp = metric.f, metric.f_prime
    if fp is None:
        def fp(u):
            h = fd_step(u)
            return (f(u + h) - f(u - h)) / (2 * h)

    def rhs(y):
        u, _, du, dv = y.T
        fu, fpu = f(u), fp(u)
        return np.stack([du, dv, fu * fpu * dv**2, -2.0 * fpu / fu * du * dv], axis=1)

    res = rk4_batch(rhs, [[p.u, p.v, x.a_u, x.a_v]], length, step,
                    lambda y: metric.contains(y[:, 0]))
    n = res.last[0] + 1
    y = res.y[:n, 0]
    return GeodesicPath(res.s[:n], y[:, 0], y[:, 1], y[:, 2], y[:, 3],
                        bool(res.truncated[0]))
