"""Surfaces of revolution realising the profile metric in Euclidean space.

In the coordinate alpha the metric reads
    ds^2 = (cos a / (a+1 - cos a))^2 dalpha^2 + sin^2(alpha) dv^2,
which is the surface (x cos v, x sin v, z) with x = sin(alpha) and
z' = cos(t)/(a+1-cos t) * sqrt(1 - (a+1-cos t)^2).  (Here "a" in the
fractions is the parameter a, not alpha.)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .alpha_profile import alpha_rhs, write_csv
from .errors import NonExistenceError, ValidationError
from .quadrature import adaptive_simpson

CURVATURE_STEP = 1e-3
METRIC_STEP = 1e-5
REGULAR_MARGIN = 1e-2


def admissible_range(a: float) -> tuple[float, float]:
    """Open interval of cos(alpha) on which the immersion exists.

    (1+a, min(2+a, 1)) for -2 < a < -1, (max(a, -1), 1+a) for -1 < a < 0,
    and (-1, 1) for the sphere a = -1.
    """
    if abs(a + 1.0) >= 1.0:
        raise NonExistenceError(
            f"|a+1| = {abs(a + 1.0):g} >= 1: the metric admits no isometric "
            "immersion as a surface of revolution")
    if a == -1.0:
        return (-1.0, 1.0)
    if a < -1.0:
        return (1.0 + a, min(2.0 + a, 1.0))
    return (max(a, -1.0), 1.0 + a)


def admissible_alpha_range(a: float) -> tuple[float, float]:
    """The same range expressed in alpha in (0, pi)."""
    lo, hi = admissible_range(a)
    return (math.acos(hi), math.acos(lo))


def arc_factor(a: float, alpha):
    """|du/dalpha| = |cos(alpha)/(a+1-cos(alpha))|: the dalpha^2 coefficient's root."""
    c = np.cos(alpha)
    return np.abs(c / (a + 1.0 - c))


def z_integrand(a: float, t: float) -> float:
    """cos(t)/w * sqrt(1 - w^2) with w = a+1 - cos(t).

    w is evaluated as cos(t0) - cos(t) = 2 sin((t+t0)/2) sin((t-t0)/2) with
    cos(t0) = a+1, which keeps its relative accuracy near the endpoint
    where w -> 0 (direct subtraction would leave ~1e-11 noise there and
    stall the adaptive quadrature).
    """
    m = a + 1.0
    if abs(m) <= 1.0:
        t0 = math.acos(m)
        w = 2.0 * math.sin(0.5 * (t + t0)) * math.sin(0.5 * (t - t0))
    else:
        w = m - math.cos(t)
    rad = (1.0 - w) * (1.0 + w)
    if rad < 0.0:
        raise ValidationError(f"complex integrand at t={t!r}: 1-(a+1-cos t)^2 = {rad:.3g}")
    return math.cos(t) / w * math.sqrt(rad)


@dataclass(frozen=True)
class RevolutionProfile:
    a: float
    alpha_range: tuple[float, float]
    alpha: np.ndarray
    x: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    quadrature_tol: float

    def z_at(self, alpha) -> np.ndarray:
        """z at arbitrary alpha: nearest sample plus a short quadrature."""
        alpha = np.asarray(alpha, float)
        out = np.empty(alpha.shape)
        for idx, t in np.ndenumerate(alpha):
            if self.a == -1.0:
                out[idx] = math.cos(t)
                continue
            j = int(np.argmin(np.abs(self.alpha - t)))
            out[idx] = self.z[j] + adaptive_simpson(
                lambda s: z_integrand(self.a, s), float(self.alpha[j]), float(t), 1e-15)
        return out[()]

    def surface(self, alpha, v) -> np.ndarray:
        alpha, v = np.broadcast_arrays(np.asarray(alpha, float), np.asarray(v, float))
        x = np.sin(alpha)
        return np.stack([x * np.cos(v), x * np.sin(v), self.z_at(alpha)], -1)

    def to_csv(self, path) -> None:
        write_csv(path, ["alpha", "x", "z"], np.column_stack([self.alpha, self.x, self.z]))


def immersion_profile(a: float, alpha0: float, alpha1: float, n: int = 200,
                      tol: float = 1e-10, margin: float = 1e-6) -> RevolutionProfile:
    """Sample x = sin(alpha) and z(alpha) = integral from alpha0 on n points.

    For a = -1 the profile is the unit sphere, x = sin(alpha), z = cos(alpha).

    Both ends must keep cos(alpha) at least ``margin`` inside the admissible
    range.  The quadrature tolerance is split evenly over the n-1 panels.
    """
    if n < 2:
        raise ValidationError("n must be >= 2")
    lo, hi = admissible_range(a)
    for al in (alpha0, alpha1):
        c = math.cos(al)
        if not (lo + margin <= c <= hi - margin) or not 0.0 < al < math.pi:
            raise ValidationError(
                f"alpha={al!r} (cos={c:.6g}) outside the admissible range "
                f"cos(alpha) in ({lo:g}, {hi:g}) with margin {margin:g}")
    alpha = np.linspace(alpha0, alpha1, n)
    if a == -1.0:
        # unit sphere; z is not shifted to vanish at alpha0
        z = np.cos(alpha)
        dz = -np.sin(alpha)
    else:
        g = lambda t: z_integrand(a, t)
        panel_tol = tol / max(1, n - 1)
        steps = [adaptive_simpson(g, float(p), float(q), panel_tol)
                 for p, q in zip(alpha[:-1], alpha[1:])]
        z = np.concatenate([[0.0], np.cumsum(steps)])
        dz = np.array([g(float(t)) for t in alpha])
    return RevolutionProfile(a, (alpha0, alpha1), alpha, np.sin(alpha), z, dz, tol)


@dataclass(frozen=True)
class RevolutionCheck:
    """Mesh plus per-sample residuals; NaN curvature marks excluded samples."""
    vertices: np.ndarray
    faces: np.ndarray
    alpha: np.ndarray
    metric_rows: np.ndarray
    curvature_rows: np.ndarray

    @property
    def metric_residual(self) -> float:
        return float(np.max(self.metric_rows))

    @property
    def curvature_residual(self) -> float:
        ok = ~np.isnan(self.curvature_rows)
        return float(np.max(self.curvature_rows[ok])) if ok.any() else float("nan")

    @property
    def curvature_checked(self) -> int:
        return int(np.count_nonzero(~np.isnan(self.curvature_rows)))

    def to_obj(self, path) -> None:
        with open(path, "w") as fh:
            for p in self.vertices:
                fh.write("v " + " ".join(format(float(c), ".17g") for c in p) + "\n")
            for f in self.faces:
                fh.write("f " + " ".join(str(int(i) + 1) for i in f) + "\n")

    def to_csv(self, path) -> None:
        write_csv(path, ["alpha", "metric_residual", "curvature_residual"],
                  np.column_stack([self.alpha, self.metric_rows, self.curvature_rows]))


def _mesh(profile: RevolutionProfile, n_v: int):
    v = np.linspace(0.0, 2.0 * np.pi, n_v, endpoint=False)
    A, V = np.meshgrid(profile.alpha, v, indexing="ij")
    x = np.sin(A)
    verts = np.stack([x * np.cos(V), x * np.sin(V),
                      np.broadcast_to(profile.z[:, None], A.shape)], -1).reshape(-1, 3)
    n_a = len(profile.alpha)
    faces = []
    for i in range(n_a - 1):
        for j in range(n_v):
            p00, p10 = i * n_v + j, (i + 1) * n_v + j
            p01, p11 = i * n_v + (j + 1) % n_v, (i + 1) * n_v + (j + 1) % n_v
            for tri in ((p00, p10, p11), (p00, p11, p01)):
                P = verts[list(tri)]
                nrm = np.cross(P[1] - P[0], P[2] - P[0])
                radial = P.mean(axis=0) * np.array([1.0, 1.0, 0.0])
                faces.append(tri if nrm @ radial >= 0 else tri[::-1])
    return verts, np.array(faces, dtype=int)


def _step_near_edge(profile: RevolutionProfile, alpha: np.ndarray, h: float) -> np.ndarray:
    # shrink the stencil where z' has its square-root blow-up
    lo, hi = admissible_alpha_range(profile.a)
    room = np.minimum(alpha - lo, hi - alpha)
    return np.minimum(h, 0.01 * room)


def surface_curvature(profile: RevolutionProfile, alpha, v=0.0,
                      h: float = CURVATURE_STEP) -> np.ndarray:
    """Gaussian curvature of the revolved surface by central differences.

    K = (LN - M^2)/(EG - F^2) with all derivatives of the parameterisation
    taken by Richardson-extrapolated central differences.
    """
    alpha = np.atleast_1d(np.asarray(alpha, float))
    X = profile.surface
    hh = _step_near_edge(profile, alpha, h)[:, None]

    def derivs(k):
        d = k * hh[:, 0]
        x0 = X(alpha, v)
        xa = (X(alpha + d, v) - X(alpha - d, v)) / (2 * k * hh)
        xv = (X(alpha, v + d) - X(alpha, v - d)) / (2 * k * hh)
        xaa = (X(alpha + d, v) - 2 * x0 + X(alpha - d, v)) / (k * hh) ** 2
        xvv = (X(alpha, v + d) - 2 * x0 + X(alpha, v - d)) / (k * hh) ** 2
        xav = (X(alpha + d, v + d) - X(alpha + d, v - d)
               - X(alpha - d, v + d) + X(alpha - d, v - d)) / (4 * (k * hh) ** 2)
        return xa, xv, xaa, xav, xvv

    d1, d2 = derivs(1.0), derivs(2.0)
    xa, xv, xaa, xav, xvv = ((4 * p - q) / 3 for p, q in zip(d1, d2))
    dot = lambda p, q: np.einsum("...i,...i->...", p, q)
    E, F, G = dot(xa, xa), dot(xa, xv), dot(xv, xv)
    nrm = np.cross(xa, xv)
    nrm /= np.linalg.norm(nrm, axis=-1, keepdims=True)
    L, M, N = dot(xaa, nrm), dot(xav, nrm), dot(xvv, nrm)
    return (L * N - M**2) / (E * G - F**2)


def revolve_and_check(profile: RevolutionProfile, n_v: int = 64,
                      regular_margin: float = REGULAR_MARGIN) -> RevolutionCheck:
    """Revolve the profile into a mesh and check it against the target metric.

    The first fundamental form in (alpha, v) is taken by central differences
    of the surface map at every sample and every mesh longitude; deviations
    are divided by max(1, |target|), which only matters near an admissible
    endpoint where E grows without bound.  The
    curvature is compared with 1 - (a+1)/cos(alpha) on interior samples where
    the surface is regular, |cos alpha| >= regular_margin; at cos alpha = 0
    both x' and z' vanish and the curvature is unbounded.
    """
    if n_v < 3:
        raise ValidationError("n_v must be >= 3")
    a = profile.a
    verts, faces = _mesh(profile, n_v)
    al = profile.alpha
    v = np.linspace(0.0, 2.0 * np.pi, n_v, endpoint=False)
    A, V = np.meshgrid(al, v, indexing="ij")
    h = _step_near_edge(profile, al, METRIC_STEP)[:, None, None]
    Xa = (profile.surface(A + h[..., 0], V) - profile.surface(A - h[..., 0], V)) / (2 * h)
    Xv = (profile.surface(A, V + METRIC_STEP)
          - profile.surface(A, V - METRIC_STEP)) / (2 * METRIC_STEP)
    dot = lambda p, q: np.einsum("...i,...i->...", p, q)
    E, F, G = dot(Xa, Xa), dot(Xa, Xv), dot(Xv, Xv)
    E_t, G_t = arc_factor(a, A) ** 2, np.sin(A) ** 2
    # absolute where the metric is O(1), relative where E blows up at an edge
    scale = np.maximum(1.0, np.maximum(E_t, G_t))
    dev = np.maximum.reduce([np.abs(E - E_t), np.abs(F), np.abs(G - G_t)]) / scale
    metric_rows = dev.max(axis=1)
    curv = np.full(al.shape, np.nan)
    idx = np.arange(1, len(al) - 1)
    idx = idx[np.abs(np.cos(al[idx])) >= regular_margin]
    if idx.size:
        curv[idx] = np.abs(surface_curvature(profile, al[idx]) - alpha_rhs(a, al[idx]))
    return RevolutionCheck(verts, faces, al.copy(), metric_rows, curv)
