"""The unit tangent bundle T1M of a warped surface, in coordinates (u, v, theta).

A point (u, v, theta) is the unit vector cos(theta) d/du + sin(theta)/f d/dv
at (u, v).  The Sasaki metric there is

    du^2 + f^2 dv^2 + (dtheta + f' dv)^2,

the last term being the squared length of the vertical (covariant) part.
A unit field is the graph theta = theta(u, v) in this chart.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._rk4 import rk4_batch
from .alpha_profile import alpha_rhs, alpha_rhs_prime
from .errors import MarginError, PoleError, ValidationError
from .frame_field import UnitField
from .warped_metric import Point2, WarpedMetric


@dataclass(frozen=True)
class SasakiPoint:
    u: float
    v: float
    theta: float


@dataclass(frozen=True)
class SasakiMetric:
    base: WarpedMetric

    def contains(self, u) -> np.ndarray:
        return self.base.contains(u)

    def components(self, u) -> np.ndarray:
        """Matrix of the metric in the (du, dv, dtheta) basis, shape (..., 3, 3)."""
        return _components(self.base.warp(u), self.base.dwarp(u))

    def christoffel(self, u) -> np.ndarray:
        """Gamma[..., i, j, k] = Gamma^i_{jk}, from f, f', f'' in closed form."""
        return _christoffel(self.base.warp(u), self.base.dwarp(u),
                            self.base.d2warp(u))

    def inner(self, u, x, y) -> np.ndarray:
        G = self.components(u)
        return np.einsum("...i,...ij,...j->...", x, G, y)


def _components(f, fp):
    f, fp = np.broadcast_arrays(np.asarray(f, float), np.asarray(fp, float))
    G = np.zeros(f.shape + (3, 3))
    G[..., 0, 0] = 1.0
    G[..., 1, 1] = f**2 + fp**2
    G[..., 1, 2] = G[..., 2, 1] = fp
    G[..., 2, 2] = 1.0
    return G


def _christoffel(f, fp, fpp):
    f, fp, fpp = np.broadcast_arrays(*(np.asarray(x, float) for x in (f, fp, fpp)))
    G = _components(f, fp)
    dG = np.zeros(f.shape + (3, 3))  # d/du of the components; nothing depends on v, theta
    dG[..., 1, 1] = 2.0 * f * fp + 2.0 * fp * fpp
    dG[..., 1, 2] = dG[..., 2, 1] = fpp
    # first kind: [jk, l] = (d_j g_lk + d_k g_lj - d_l g_jk) / 2, only d_u != 0
    first = np.zeros(f.shape + (3, 3, 3))  # first[..., l, j, k]
    first[..., :, 0, :] += 0.5 * dG
    first[..., :, :, 0] += 0.5 * dG
    first[..., 0, :, :] -= 0.5 * dG
    Ginv = np.linalg.inv(G)
    return np.einsum("...il,...ljk->...ijk", Ginv, first)


def sasaki_components(sm: SasakiMetric, q: SasakiPoint) -> np.ndarray:
    return sm.components(q.u)


def imbed(field: UnitField, p: Point2) -> SasakiPoint:
    """The point xi(p) of the bundle; theta is not reduced mod 2 pi."""
    return SasakiPoint(p.u, p.v, field.theta(p.u, p.v))


def _tangent_basis(sm, field, u, v):
    th_u, th_v = field.partials(u, v, sm.base)
    one, zero = np.ones_like(th_u), np.zeros_like(th_u)
    return np.stack([one, zero, th_u], -1), np.stack([zero, one, th_v], -1)


def induced_metric(sm: SasakiMetric, field: UnitField, p: Point2) -> np.ndarray:
    """Pull-back of the Sasaki metric to the base through the field, (..., 2, 2)."""
    u = sm.base.check(p.u)
    Tu, Tv = _tangent_basis(sm, field, u, p.v)
    G = sm.components(u)
    guu = np.einsum("...i,...ij,...j->...", Tu, G, Tu)
    guv = np.einsum("...i,...ij,...j->...", Tu, G, Tv)
    gvv = np.einsum("...i,...ij,...j->...", Tv, G, Tv)
    return np.stack([np.stack([guu, guv], -1), np.stack([guv, gvv], -1)], -2)


def orthonormal_tangents(sm: SasakiMetric, field: UnitField, p: Point2):
    """Sasaki-orthonormal basis (b1, b2) of the tangent plane of xi(M) at xi(p)."""
    u = sm.base.check(p.u)
    Tu, Tv = _tangent_basis(sm, field, u, p.v)
    G = sm.components(u)
    ip = lambda x, y: np.einsum("...i,...ij,...j->...", x, G, y)
    b1 = Tu / np.sqrt(ip(Tu, Tu))[..., None]
    w = Tv - ip(Tv, b1)[..., None] * b1
    b2 = w / np.sqrt(ip(w, w))[..., None]
    return b1, b2


@dataclass(frozen=True)
class BundlePath:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    velocity: np.ndarray
    truncated: bool

    def to_csv(self, path, field: UnitField | None = None) -> None:
        dev = (np.abs(self.theta - field.theta(self.u, self.v))
               if field is not None else np.full_like(self.t, np.nan))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "u", "v", "theta", "deviation"])
            for row in zip(self.t, self.u, self.v, self.theta, dev):
                w.writerow([format(float(x), ".17g") for x in row])


def shoot_many(sm: SasakiMetric, starts: np.ndarray, velocities: np.ndarray,
               length: float, step: float = 1e-3) -> list[BundlePath]:
    """Integrate several bundle geodesics at once (fixed-step RK4).

    ``starts`` and ``velocities`` have shape (m, 3).  Each velocity must be
    Sasaki-unit to 1e-12.
    """
    if not step > 0:
        raise ValidationError("step must be positive")
    starts = np.atleast_2d(np.asarray(starts, float))
    velocities = np.atleast_2d(np.asarray(velocities, float))
    norms = sm.inner(starts[:, 0], velocities, velocities)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise ValidationError("initial velocities must be unit in the Sasaki metric")
    base = sm.base
    fns = (base.f, base.f_prime, base.f_double_prime)
    if None in fns:
        raise ValidationError("geodesic shooting needs analytic f' and f''")

    def rhs(y):
        x, w = y[:, :3], y[:, 3:]
        u = x[:, 0]
        Gam = _christoffel(*(fn(u) for fn in fns))
        acc = -np.einsum("nijk,nj,nk->ni", Gam, w, w)
        return np.concatenate([w, acc], axis=1)

    res = rk4_batch(rhs, np.concatenate([starts, velocities], axis=1),
                    length, step, lambda y: base.contains(y[:, 0]))
    paths = []
    for j in range(starts.shape[0]):
        n = res.last[j] + 1
        y = res.y[:n, j]
        paths.append(BundlePath(res.s[:n], y[:, 0], y[:, 1], y[:, 2], y[:, 3:],
                                bool(res.truncated[j])))
    return paths


def geodesic_shoot(sm: SasakiMetric, q: SasakiPoint, w, length: float,
                   step: float = 1e-3) -> BundlePath:
    """Sasaki geodesic from ``q`` with unit initial velocity ``w`` (du, dv, dtheta)."""
    return shoot_many(sm, [[q.u, q.v, q.theta]], [w], length, step)[0]


def random_tangent_shots(sm: SasakiMetric, field: UnitField, u_range, v_range,
                         n: int, seed: int):
    """Seeded random base points and Sasaki-unit directions tangent to xi(M)."""
    rng = np.random.default_rng(seed)
    u = rng.uniform(*u_range, size=n)
    v = rng.uniform(*v_range, size=n)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    b1, b2 = orthonormal_tangents(sm, field, Point2(u, v))
    w = np.cos(phi)[:, None] * b1 + np.sin(phi)[:, None] * b2
    starts = np.column_stack([u, v, field.theta(u, v)])
    return starts, w


def surface_deviation(path: BundlePath, field: UnitField) -> float:
    """Max |theta(t) - theta_field(u(t), v(t))| along the path.

    Both angles are continuous lifts, so no reduction mod 2 pi is applied.
    """
    if len(path.t) == 0:
        return 0.0
    return float(np.max(np.abs(path.theta - field.theta(path.u, path.v))))


def numeric_sff(sm: SasakiMetric, field: UnitField, p: Point2, h: float = 1e-4,
                richardson: bool = True) -> np.ndarray:
    """Second fundamental form of xi(M) in the coordinate directions d/du, d/dv.

    II_ij = g(D_i D_j X + Gamma(T_i, T_j), N) with X(u, v) = (u, v, theta(u, v)),
    second derivatives of theta by central differences (Richardson-
    extrapolated from steps h and 2h) and N the unit normal with positive
    dtheta-component.  Returns shape (..., 2, 2).
    """
    u = np.asarray(p.u, float)
    v = np.asarray(p.v, float)
    u, v = np.broadcast_arrays(u, v)
    if not (np.all(sm.contains(u - 2 * h)) and np.all(sm.contains(u + 2 * h))):
        raise MarginError("numeric_sff needs a margin of 2h inside the domain")
    th = field.theta

    def second(hh):
        t0 = th(u, v)
        tuu = (th(u + hh, v) - 2 * t0 + th(u - hh, v)) / hh**2
        tvv = (th(u, v + hh) - 2 * t0 + th(u, v - hh)) / hh**2
        tuv = (th(u + hh, v + hh) - th(u + hh, v - hh)
               - th(u - hh, v + hh) + th(u - hh, v - hh)) / (4 * hh**2)
        return tuu, tuv, tvv

    def first(hh):
        tu = (th(u + hh, v) - th(u - hh, v)) / (2 * hh)
        tv = (th(u, v + hh) - th(u, v - hh)) / (2 * hh)
        return tu, tv

    if richardson:
        s1, s2 = second(h), second(2 * h)
        tuu, tuv, tvv = ((4 * a - b) / 3 for a, b in zip(s1, s2))
        f1, f2 = first(h), first(2 * h)
        tu, tv = ((4 * a - b) / 3 for a, b in zip(f1, f2))
    else:
        tuu, tuv, tvv = second(h)
        tu, tv = first(h)

    one, zero = np.ones_like(u), np.zeros_like(u)
    T = [np.stack([one, zero, tu], -1), np.stack([zero, one, tv], -1)]
    D = [[np.stack([zero, zero, tuu], -1), np.stack([zero, zero, tuv], -1)],
         [np.stack([zero, zero, tuv], -1), np.stack([zero, zero, tvv], -1)]]
    G = sm.components(u)
    Gam = sm.christoffel(u)
    n = np.stack([-tu, -tv, one], -1)  # annihilates both tangents
    Ginv = np.linalg.inv(G)
    Nvec = np.einsum("...ij,...j->...i", Ginv, n)
    scale = np.sqrt(np.einsum("...i,...i->...", n, Nvec))
    sign = np.where(Nvec[..., 2] >= 0, 1.0, -1.0)
    out = np.empty(u.shape + (2, 2))
    for i in range(2):
        for j in range(2):
            acc = D[i][j] + np.einsum("...kab,...a,...b->...k", Gam, T[i], T[j])
            out[..., i, j] = sign * np.einsum("...k,...k->...", n, acc) / scale
    return out


def induced_curvature_at(a: float, alpha) -> np.ndarray:
    """Curvature of xi(M) for the totally geodesic field, as a function of alpha.

    Kt = K (K - 2 cot(alpha/2) dK/dalpha) / 4 with K = 1 - (a+1)/cos(alpha).
    """
    alpha = np.asarray(alpha, float)
    half = np.tan(0.5 * alpha)
    if np.any(half == 0):
        raise PoleError("cot(alpha/2) has a pole at alpha = 0 mod 2 pi")
    K = alpha_rhs(a, alpha)
    dK = alpha_rhs_prime(a, alpha)
    return (0.25 * K * (K - 2.0 * dK / half))[()]


def induced_curvature(profile, u) -> np.ndarray:
    return induced_curvature_at(profile.params.a, profile.alpha(u))


def induced_curvature_fd(a: float, alpha, h: float = 1e-4) -> np.ndarray:
    """Curvature of du^2 + 4 sin^2(alpha/2) dv^2 by finite differences in alpha.

    Uses d/du = K d/dalpha, so Kt = -K d/dalpha(K d/dalpha r) / r with
    r = 2 sin(alpha/2).
    """
    alpha = np.asarray(alpha, float)
    r = lambda x: 2.0 * np.sin(0.5 * x)
    K = lambda x: alpha_rhs(a, x)
    r_u = lambda x: K(x) * (r(x + h) - r(x - h)) / (2 * h)
    r_uu = K(alpha) * (r_u(alpha + h) - r_u(alpha - h)) / (2 * h)
    return (-r_uu / r(alpha))[()]


def numeric_sff_frame(sm: SasakiMetric, field: UnitField, p: Point2,
                      h: float = 1e-4) -> np.ndarray:
    """``numeric_sff`` expressed in the lifted orthonormal frame of xi(M).

    The frame is (xi_* e0, xi_* e1 / sqrt(1 + lambda^2)); the result is
    negated so that it compares entrywise with
    ``frame_field.second_fundamental_form`` (whose implicit normal has
    negative dtheta-component).
    """
    from .frame_field import frame_invariants

    inv = frame_invariants(sm.base, field, p)
    II = numeric_sff(sm, field, p, h)
    s = 1.0 / np.sqrt(1.0 + inv.lam**2)
    B = np.stack([np.stack([inv.e0.a_u, inv.e0.a_v], -1),
                  np.stack([s * inv.e1.a_u, s * inv.e1.a_v], -1)], -2)
    return -np.einsum("...ai,...ij,...bj->...ab", B, II, B)
