"""Unit fields, their moving-frame invariants and the second fundamental form.

A unit field is stored as its angle theta(u, v) against d/du, so that
xi = cos(theta) d/du + sin(theta)/f d/dv.  The companion field is
eta = sin(omega) e0 - cos(omega) e1, i.e. xi turned by -pi/2 in the frame
(d/du, d/dv / f).  With that choice the field of angle a*v + omega0 has
omega = theta and k = tan(alpha/2) sin(omega).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .alpha_profile import EPS_K
from .errors import DerivativeUnavailableError, StationaryPointError, ValidationError
from .warped_metric import (
    Point2,
    Tangent2,
    WarpedMetric,
    covariant_derivative_components,
    fd_step,
)

AngleFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
FRAME_FD_STEP = 1e-5


def _zeros(u, v):
    return np.zeros(np.broadcast(np.asarray(u), np.asarray(v)).shape)


@dataclass(frozen=True)
class UnitField:
    """Unit vector field encoded by its angle against d/du.

    First partials are optional (central differences are used when absent);
    second partials enable the fully analytic evaluation of the second
    fundamental form.
    """

    theta: AngleFn
    theta_u: Optional[AngleFn] = None
    theta_v: Optional[AngleFn] = None
    theta_uu: Optional[AngleFn] = None
    theta_uv: Optional[AngleFn] = None
    theta_vv: Optional[AngleFn] = None
    label: str = ""

    @classmethod
    def linear(cls, a: float, omega0: float) -> "UnitField":
        """theta = a*v + omega0."""
        return cls(
            theta=lambda u, v: a * np.asarray(v, dtype=float) + omega0 + _zeros(u, v),
            theta_u=_zeros,
            theta_v=lambda u, v: a + _zeros(u, v),
            theta_uu=_zeros, theta_uv=_zeros, theta_vv=_zeros,
            label=f"theta = {a!r}*v + {omega0!r}",
        )

    @classmethod
    def constant(cls, angle: float) -> "UnitField":
        return cls.linear(0.0, angle)

    def plus_v_term(self, g, dg, d2g, label: str = "") -> "UnitField":
        """Add a function g(v) (with its first two derivatives) to the angle."""
        def opt(fn, extra):
            if fn is None:
                return None
            return lambda u, v: fn(u, v) + extra(u, v)

        return UnitField(
            theta=lambda u, v: self.theta(u, v) + g(v),
            theta_u=self.theta_u,
            theta_v=opt(self.theta_v, lambda u, v: dg(v)),
            theta_uu=self.theta_uu,
            theta_uv=self.theta_uv,
            theta_vv=opt(self.theta_vv, lambda u, v: d2g(v)),
            label=label or f"{self.label} + g(v)",
        )

    def plus_sin_v(self, amplitude: float, frequency: float = 1.0) -> "UnitField":
        eps, w = amplitude, frequency
        return self.plus_v_term(
            lambda v: eps * np.sin(w * v),
            lambda v: eps * w * np.cos(w * v),
            lambda v: -eps * w * w * np.sin(w * v),
            label=f"{self.label} + {eps!r}*sin({w!r} v)",
        )

    def rotated(self, delta: float) -> "UnitField":
        """Same field turned by the constant angle ``delta``."""
        return UnitField(lambda u, v: self.theta(u, v) + delta, self.theta_u,
                         self.theta_v, self.theta_uu, self.theta_uv,
                         self.theta_vv, label=f"{self.label} rotated {delta!r}")

    @property
    def has_second_partials(self) -> bool:
        return None not in (self.theta_u, self.theta_v, self.theta_uu,
                            self.theta_uv, self.theta_vv)

    def partials(self, u, v, metric: Optional[WarpedMetric] = None):
        """(d theta/du, d theta/dv); central differences for missing ones."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.theta_u is not None:
            tu = self.theta_u(u, v)
        else:
            h = fd_step(u)
            if metric is not None and not (np.all(metric.contains(u - h))
                                           and np.all(metric.contains(u + h))):
                raise DerivativeUnavailableError(
                    "finite-difference stencil for d theta/du leaves the domain")
            tu = (self.theta(u + h, v) - self.theta(u - h, v)) / (2 * h)
        if self.theta_v is not None:
            tv = self.theta_v(u, v)
        else:
            h = fd_step(v)
            tv = (self.theta(u, v + h) - self.theta(u, v - h)) / (2 * h)
        return tu + _zeros(u, v), tv + _zeros(u, v)

    def components(self, metric: WarpedMetric, p: Point2) -> Tangent2:
        th = self.theta(p.u, p.v)
        return Tangent2(np.cos(th), np.sin(th) / metric.warp(p.u))


def tg_field(profile) -> UnitField:
    """The totally geodesic field of angle a*v + omega0 over ``profile``.

    The field lives on ``profile.metric()``.
    """
    return UnitField.linear(profile.params.a, profile.params.omega0)


@dataclass(frozen=True)
class FrameInvariants:
    k: np.ndarray
    kappa: np.ndarray
    lam: np.ndarray
    omega: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    xi: Tangent2
    eta: Tangent2
    e0: Tangent2
    e1: Tangent2
    e0_lambda: np.ndarray
    e1_lambda: np.ndarray
    e0_omega: np.ndarray
    e1_omega: np.ndarray
    mode: str


@dataclass(frozen=True)
class SFF:
    o00: np.ndarray
    o01: np.ndarray
    o11: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        o00, o01, o11 = np.broadcast_arrays(self.o00, self.o01, self.o11)
        return np.stack([np.stack([o00, o01], -1), np.stack([o01, o11], -1)], -2)

    @property
    def max_abs(self) -> np.ndarray:
        return np.maximum(np.abs(self.o00), np.maximum(np.abs(self.o01), np.abs(self.o11)))


def _k_kappa(metric, field, u, v):
    """k, kappa and the ingredients reused by the caller."""
    f = metric.warp(u)
    th = field.theta(u, v)
    th_u, th_v = field.partials(u, v, metric)
    c, s = np.cos(th), np.sin(th)
    xi = (c, s / f)
    eta = (s, -c / f)
    a_u, a_v = covariant_derivative_components(metric, th, th_u, th_v, *xi, u)
    k = a_u * eta[0] + f**2 * a_v * eta[1]
    b_u, b_v = covariant_derivative_components(
        metric, th - 0.5 * np.pi, th_u, th_v, *eta, u)
    kappa = b_u * xi[0] + f**2 * b_v * xi[1]
    return k, kappa, th, th_u, th_v, xi, eta, f


def _mode(field: UnitField, mode: str) -> str:
    if mode == "auto":
        return "analytic" if field.has_second_partials else "fd"
    if mode == "analytic" and not field.has_second_partials:
        raise ValidationError("analytic mode needs all second partials of theta")
    if mode not in ("analytic", "fd"):
        raise ValidationError(f"unknown mode {mode!r}")
    return mode


def frame_invariants(metric: WarpedMetric, field: UnitField, p: Point2,
                     mode: str = "auto", eps_k: float = EPS_K) -> FrameInvariants:
    """k, kappa, lambda, omega, mu, sigma and the frame e0, e1 at ``p``.

    ``p`` may hold arrays.  In analytic mode the derivatives of lambda and
    omega come from closed-form differentiation (needs second partials of
    theta and f''); in fd mode from central differences of lambda and omega
    along e0 and e1 with step 1e-5.
    """
    mode = _mode(field, mode)
    u = metric.check(p.u)
    v = np.asarray(p.v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    k, kappa, th, th_u, th_v, xi, eta, f = _k_kappa(metric, field, u, v)
    lam = np.hypot(k, kappa)
    if np.any(lam <= eps_k):
        raise StationaryPointError(
            f"lambda = {np.min(lam):.3g} <= {eps_k:g}: stationary point of the field")
    omega = np.arctan2(k, kappa)
    cw, sw = kappa / lam, k / lam
    e0 = (cw * xi[0] + sw * eta[0], cw * xi[1] + sw * eta[1])
    e1 = (sw * xi[0] - cw * eta[0], sw * xi[1] - cw * eta[1])
    fp = metric.dwarp(u)

    if mode == "analytic":
        fpp = metric.d2warp(u)
        c, s = np.cos(th), np.sin(th)
        # with P = theta_u and Q = (theta_v + f')/f, k = -(cos th P + sin th Q)
        P_u, P_v = field.theta_uu(u, v), field.theta_uv(u, v)
        Q_u = (field.theta_uv(u, v) + fpp) / f - (th_v + fp) * fp / f**2
        Q_v = field.theta_vv(u, v) / f
        dk = [-(c * Pi + s * Qi) + kappa * ti for Pi, Qi, ti in
              ((P_u, Q_u, th_u), (P_v, Q_v, th_v))]
        dkap = [s * Pi - c * Qi - k * ti for Pi, Qi, ti in
                ((P_u, Q_u, th_u), (P_v, Q_v, th_v))]
        dlam = [(k * a + kappa * b) / lam for a, b in zip(dk, dkap)]
        dom = [(kappa * a - k * b) / lam**2 for a, b in zip(dk, dkap)]
        e0_lam = dlam[0] * e0[0] + dlam[1] * e0[1]
        e1_lam = dlam[0] * e1[0] + dlam[1] * e1[1]
        e0_om = dom[0] * e0[0] + dom[1] * e0[1]
        e1_om = dom[0] * e1[0] + dom[1] * e1[1]
    else:
        h = FRAME_FD_STEP

        def shifted(d):
            up, vp = u + h * d[0], v + h * d[1]
            um, vm = u - h * d[0], v - h * d[1]
            if not (np.all(metric.contains(up)) and np.all(metric.contains(um))):
                raise DerivativeUnavailableError(
                    "frame finite-difference stencil leaves the domain")
            kp, qp = _k_kappa(metric, field, up, vp)[:2]
            km, qm = _k_kappa(metric, field, um, vm)[:2]
            d_lam = (np.hypot(kp, qp) - np.hypot(km, qm)) / (2 * h)
            d_om = np.angle((qp + 1j * kp) / (qm + 1j * km)) / (2 * h)
            return d_lam, d_om

        e0_lam, e0_om = shifted(e0)
        e1_lam, e1_om = shifted(e1)

    # angle of e0 is theta - omega; derivatives of it along the frame
    e0_phi = th_u * e0[0] + th_v * e0[1] - e0_om
    e1_phi = th_u * e1[0] + th_v * e1[1] - e1_om
    # back to coordinate partials of phi for the covariant derivative
    det = e0[0] * e1[1] - e0[1] * e1[0]
    phi_u = (e0_phi * e1[1] - e1_phi * e0[1]) / det
    phi_v = (e1_phi * e0[0] - e0_phi * e1[0]) / det
    phi = th - omega
    d00 = covariant_derivative_components(metric, phi, phi_u, phi_v, *e0, u)
    mu = d00[0] * e1[0] + f**2 * d00[1] * e1[1]
    d11 = covariant_derivative_components(
        metric, phi + 0.5 * np.pi, phi_u, phi_v, *e1, u)
    sigma = d11[0] * e0[0] + f**2 * d11[1] * e0[1]

    T = Tangent2
    return FrameInvariants(
        k=k, kappa=kappa, lam=lam, omega=omega, mu=mu, sigma=sigma,
        xi=T(*xi), eta=T(*eta), e0=T(*e0), e1=T(*e1),
        e0_lambda=e0_lam, e1_lambda=e1_lam, e0_omega=e0_om, e1_omega=e1_om,
        mode=mode,
    )


def sff_from_invariants(inv: FrameInvariants) -> SFF:
    lam = inv.lam
    q = 1.0 + lam**2
    o00 = -inv.mu * lam / np.sqrt(q)
    o01 = 0.5 * (inv.sigma * lam + (1.0 - lam**2) / q * inv.e0_lambda)
    o11 = inv.e1_lambda / q**1.5
    return SFF(o00, o01, o11)


def second_fundamental_form(metric: WarpedMetric, field: UnitField, p: Point2,
                            mode: str = "auto", eps_k: float = EPS_K) -> SFF:
    """Closed-form second fundamental form of xi(M) in the unit tangent bundle.

    Entries in the frame (e0, e1):
    O00 = -mu lam/sqrt(1+lam^2),
    O01 = (sigma lam + (1-lam^2)/(1+lam^2) e0(lam)) / 2,
    O11 = e1(lam/sqrt(1+lam^2)).
    """
    return sff_from_invariants(frame_invariants(metric, field, p, mode, eps_k))


@dataclass(frozen=True)
class TGResidual:
    max_abs: float
    argmax: tuple[float, float]
    grid: tuple[int, int]

    def to_json(self) -> str:
        return json.dumps({"max_abs": self.max_abs, "argmax": list(self.argmax),
                           "grid": list(self.grid)})


def lattice(u_range, n_u: int, n_v: int, v_range=(0.0, 2 * math.pi)):
    """Closed n_u x n_v lattice over the given ranges."""
    if n_u < 1 or n_v < 1:
        raise ValidationError("lattice must have at least one point per axis")
    return np.linspace(*u_range, n_u), np.linspace(*v_range, n_v)


def profile_lattice(profile, n_u: int, n_v: int, v_range=(0.0, 2 * math.pi),
                    margin: float = 0.02):
    """Lattice over the profile's validity interval, inset by ``margin`` of its length."""
    lo, hi = profile.u_interval
    pad = margin * (hi - lo)
    return lattice((lo + pad, hi - pad), n_u, n_v, v_range)


def tg_residual(metric: WarpedMetric, field: UnitField, u_values, v_values,
                mode: str = "auto") -> TGResidual:
    """Sup over the lattice u_values x v_values of the max-abs entry of Omega."""
    u_values = np.asarray(u_values, dtype=float).ravel()
    v_values = np.asarray(v_values, dtype=float).ravel()
    if u_values.size == 0 or v_values.size == 0:
        raise ValidationError("empty lattice")
    U, V = np.meshgrid(u_values, v_values, indexing="ij")
    m = second_fundamental_form(metric, field, Point2(U, V), mode).max_abs
    i = np.unravel_index(int(np.argmax(m)), m.shape)
    return TGResidual(float(m[i]), (float(U[i]), float(V[i])),
                      (u_values.size, v_values.size))
