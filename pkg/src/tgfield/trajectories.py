"""Integral curves of the totally geodesic field and their closed-form invariants."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._rk4 import rk4_batch
from .alpha_profile import FieldParams
from .errors import (
    BranchError,
    DegenerateFieldError,
    ParameterizationError,
    PoleError,
    ValidationError,
)
from .frame_field import FrameInvariants, UnitField, frame_invariants
from .warped_metric import Point2

CASE_TOL = 1e-12


def case_of(a: float) -> str:
    if abs(a) <= CASE_TOL:
        return "a_zero"
    if abs(a + 2.0) <= CASE_TOL:
        return "a_minus_2"
    return "generic"


@dataclass(frozen=True)
class Trajectory:
    params: FieldParams
    s: np.ndarray
    u: np.ndarray
    v: np.ndarray
    truncated: bool
    profile: object

    @property
    def points(self) -> Point2:
        return Point2(self.u, self.v)

    def alpha(self) -> np.ndarray:
        return self.profile.alpha(self.u)

    def speed_defect(self) -> float:
        """max | |gamma'|_g - 1 | from the defining system (not from differences)."""
        w = self.params.a * self.v + self.params.omega0
        sa = np.sin(self.alpha())
        du, dv = np.cos(w), np.sin(w) / sa
        return float(np.max(np.abs(np.sqrt(du**2 + (sa * dv) ** 2) - 1.0)))

    def columns(self) -> dict[str, np.ndarray]:
        metric = self.profile.metric()
        field = UnitField.linear(self.params.a, self.params.omega0)
        inv = frame_invariants(metric, field, self.points)
        fi = first_integral(self.profile, self.params, self.points).value
        return {"s": self.s, "u": self.u, "v": self.v, "alpha": self.alpha(),
                "k": inv.k, "kappa": inv.kappa, "first_integral": fi}

    def to_csv(self, path) -> dict[str, np.ndarray]:
        cols = self.columns()
        write_columns(path, cols)
        return cols


def write_columns(path, cols: dict[str, np.ndarray]) -> None:
    names = list(cols)
    data = np.column_stack([np.broadcast_to(cols[n], np.shape(cols[names[0]]))
                            for n in names])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in data:
            w.writerow([format(float(x), ".17g") for x in row])


def integrate_trajectory(profile, params: FieldParams, start: Point2,
                         length: float, step: float = 1e-3) -> Trajectory:
    """RK4 for du/ds = cos(w), dv/ds = sin(w)/sin(alpha(u)), w = a v + omega0.

    Stops with ``truncated=True`` when the curve leaves the profile's
    validity interval.
    """
    if not step > 0:
        raise ValidationError("step must be positive")
    if not profile.contains(start.u):
        raise ValidationError(f"start u={start.u} outside {profile.u_interval}")
    a, w0 = params.a, params.omega0
    alpha = profile._alpha

    def rhs(y):
        u, v = y[:, 0], y[:, 1]
        w = a * v + w0
        return np.column_stack([np.cos(w), np.sin(w) / np.sin(alpha(u))])

    res = rk4_batch(rhs, [[start.u, start.v]], length, step,
                    lambda y: profile.contains(y[:, 0]))
    n = res.last[0] + 1
    y = res.y[:n, 0]
    return Trajectory(params, res.s[:n], y[:, 0], y[:, 1],
                      bool(res.truncated[0]), profile)


@dataclass(frozen=True)
class FirstIntegralValue:
    case_tag: str
    value: np.ndarray
    omega0: float


def _generic_base(a, t2):
    return a + (a + 2.0) * t2


def first_integral(profile, params: FieldParams, p: Point2) -> FirstIntegralValue:
    """The constant c of the separated trajectory equation at ``p``.

    generic:  tan(alpha/2) sin(w) = c (a + (a+2) tan^2(alpha/2))^((a+1)/(a+2))
    a = -2:   tan(alpha/2) sin(w) = c exp(tan^2(alpha/2) / 2)
    a = 0:    tan(omega0)/2 (1/(1-cos alpha) + ln|tan(alpha/2)|) = v - c
    """
    a, w0 = params.a, params.omega0
    case = case_of(a)
    al = profile.alpha(p.u)
    v = np.asarray(p.v, float)
    t = np.tan(0.5 * al)
    if case == "a_zero":
        if abs(math.sin(w0)) < CASE_TOL or abs(math.cos(w0)) < CASE_TOL:
            raise DegenerateFieldError(
                "a = 0 needs omega0 != 0 mod pi/2 (cot(omega) or tan(omega0) undefined)")
        c = v - 0.5 * math.tan(w0) * (1.0 / (1.0 - np.cos(al)) + np.log(np.abs(t)))
    elif case == "a_minus_2":
        c = t * np.sin(-2.0 * v + w0) * np.exp(-0.5 * t**2)
    else:
        e = (a + 1.0) / (a + 2.0)
        lhs = t * np.sin(a * v + w0)
        if e == 0.0:
            c = lhs
        else:
            base = _generic_base(a, t**2)
            if np.any(base <= 0):
                raise BranchError(
                    f"a + (a+2) tan^2(alpha/2) = {np.min(base):.3g} <= 0 with "
                    f"non-integer exponent {e:.3g}")
            c = lhs / base**e
    return FirstIntegralValue(case, np.asarray(c)[()], w0)


def intrinsic_relation_residual(inv: FrameInvariants, c, params: FieldParams,
                                v=None) -> np.ndarray:
    """|k - RHS| of the curvature relation of the matching case.

    Uses lambda^2 = k^2 + kappa^2 in place of tan^2(alpha/2).  The a = 0
    relation involves v explicitly and only holds along one trajectory.
    """
    a, w0 = params.a, params.omega0
    case = case_of(a)
    k = inv.k
    lam2 = inv.k**2 + inv.kappa**2
    if case == "a_zero":
        if v is None:
            raise ValidationError("the a = 0 relation needs v")
        if abs(math.sin(w0)) < CASE_TOL or abs(math.cos(w0)) < CASE_TOL:
            raise DegenerateFieldError("a = 0 needs omega0 != 0 mod pi/2")
        rhs = math.sin(w0) * np.exp(2.0 / math.tan(w0) * (np.asarray(v) - c)
                                    - 0.5 * (1.0 + lam2) / lam2)
    elif case == "a_minus_2":
        rhs = c * np.exp(0.5 * lam2)
    else:
        e = (a + 1.0) / (a + 2.0)
        if e == 0.0:
            rhs = c + 0.0 * lam2
        else:
            base = _generic_base(a, lam2)
            if np.any(base <= 0):
                raise BranchError("non-positive base in the intrinsic relation")
            rhs = c * base**e
    return np.abs(k - rhs)[()]


def xi_k(profile, params: FieldParams, p: Point2) -> np.ndarray:
    """Derivative of k along the field: (a+1) cos w sin w (1 - 1/cos a)/(2 cos^2(alpha/2))."""
    a = params.a
    al = profile.alpha(p.u)
    w = a * np.asarray(p.v, float) + params.omega0
    if a == -1.0:
        return np.zeros(np.broadcast(al, w).shape)[()]
    ca = np.cos(al)
    if np.any(ca == 0):
        raise PoleError("cos(alpha) = 0")
    return ((a + 1.0) * np.cos(w) * np.sin(w) / (2.0 * np.cos(0.5 * al) ** 2)
            * (1.0 - 1.0 / ca))[()]


def derivative_along(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """dy/ds on a uniform grid: 5-point central differences, NaN at the two ends."""
    h = s[1] - s[0]
    out = np.full_like(y, np.nan, dtype=float)
    out[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    return out


# -- the sphere (a = -1) ---------------------------------------------------

def embed_sphere(u, v) -> np.ndarray:
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    return np.stack([np.sin(u) * np.cos(v), np.sin(u) * np.sin(v), np.cos(u)], -1)


def sphere_circle(c, v) -> np.ndarray:
    """Point with parameter v on the integral circle of curvature c."""
    c, v = np.broadcast_arrays(np.asarray(c, float), np.asarray(v, float))
    s = np.sin(v)
    den = c**2 + s**2
    if np.any(den == 0):
        raise ParameterizationError("c = 0 and sin v = 0: the circle point is 0/0")
    return np.stack([2 * c * s * np.cos(v) / den, 2 * c * s**2 / den,
                     -(c**2 - s**2) / den], -1)


def stereographic(p: Point2):
    """(rho, phi) = (tan(u/2), v): projection of the unit sphere from its south pole."""
    u = np.asarray(p.u, float)
    if np.any(np.abs(np.cos(0.5 * u)) <= 1e-12):
        raise PoleError("u = pi is the projection pole")
    return np.tan(0.5 * u)[()], np.asarray(p.v, float)[()]


def fit_plane(points: np.ndarray):
    """Least-squares plane through 3D points: (unit normal, offset, max residual)."""
    pts = np.asarray(points, float)
    centroid = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - centroid)
    n = vt[-1]
    d = float(n @ centroid)
    return n, d, float(np.max(np.abs(pts @ n - d)))


def resample_circle(c: float, v_lo: float, v_hi: float, spacing: float = 1e-3):
    """sphere_circle between two parameters, resampled at uniform arc length."""
    vv = np.linspace(v_lo, v_hi, 20001)
    pts = sphere_circle(c, vv)
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    n = max(2, int(math.ceil(arc[-1] / spacing)) + 1)
    return sphere_circle(c, np.interp(np.linspace(0, arc[-1], n), arc, vv))


def polyline_distance(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each point to the polyline ``poly`` (nearest-segment projection)."""
    from scipy.spatial import cKDTree

    tree = cKDTree(poly)
    _, idx = tree.query(points)
    best = np.full(len(points), np.inf)
    for off in (-1, 0):
        i = np.clip(idx + off, 0, len(poly) - 2)
        a, b = poly[i], poly[i + 1]
        ab = b - a
        t = np.clip(np.einsum("ij,ij->i", points - a, ab)
                    / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
        d = np.linalg.norm(points - (a + t[:, None] * ab), axis=1)
        best = np.minimum(best, d)
    return best


def sphere_trajectory_start(c: float, x0: float = 3.0):
    """Start point and length for the a = -1, omega0 = pi curve with constant c.

    In the stereographic plane the curve is the line y = c, traversed from
    x = x0 to x = -x0.
    """
    rho = math.hypot(x0, c)
    start = Point2(2.0 * math.atan(rho), math.atan2(c, x0))
    r = math.sqrt(1.0 + c * c)
    length = 4.0 / r * math.atan(x0 / r)
    return start, length
