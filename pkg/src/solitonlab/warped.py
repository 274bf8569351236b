"""Rotationally symmetric and product metrics with closed-form curvature.

Two metric families cover everything this package needs:

* ``WarpedMetric`` -- g = dr^2 + w(r)^2 g_{S^{d-1}} on a disk/ball, d in {2, 3},
  with a smooth pole at r = 0 (w(0) = 0, w'(0) = 1).
* ``ProductMetric`` -- ds^2 + g_fiber with a flat line factor and a 2-d warped
  fiber.

Curvature comes from the standard warped-product formulas

    K_rad = -w''/w          (planes containing the radial direction)
    K_sph = (1 - w'^2)/w^2  (planes tangent to the symmetry orbit)

re-derived in docs/derivations.md.  All objects are immutable and every
operation is a pure function, so grid scans are trivially parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "DomainError",
    "GeodesicError",
    "WarpedMetric",
    "ProductMetric",
    "RadialPotential",
    "ProductPotential",
    "CurvatureSample",
    "GeodesicPath",
    "curvature_at",
    "soliton_residual",
    "conserved_quantity",
    "geodesic",
]

#: below this radius the pole series w = r + w3 r^3 replaces the raw
#: formulas, since (1 - w'^2)/w^2 is 0/0 at the pole
POLE_CUTOFF = 1e-3


class DomainError(ValueError):
    """Point outside the metric's radial domain."""


class GeodesicError(RuntimeError):
    """Two-point geodesic solve failed; carries the best length bracket."""

    def __init__(self, message, best_bound=None):
        super().__init__(message)
        self.best_bound = best_bound


@dataclass(frozen=True)
class WarpedMetric:
    """dr^2 + w(r)^2 g_{S^{dim-1}} with a smooth pole at the origin.

    ``w``, ``wp``, ``wpp`` evaluate the warp function and its first two
    derivatives; for interpolated profiles the second derivative must come
    from the defining ODE, not from differentiating an interpolant.
    """

    dim: int
    w: Callable[[float], float]
    wp: Callable[[float], float]
    wpp: Callable[[float], float]
    domain_max: float

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")

    def check_radius(self, r: float) -> float:
        r = float(r)
        if not 0.0 <= r <= self.domain_max:
            raise DomainError(f"radius {r} outside [0, {self.domain_max}]")
        return r


@dataclass(frozen=True)
class ProductMetric:
    """ds^2 + g_fiber, flat line factor times a 2-d warped fiber."""

    fiber: WarpedMetric

    def __post_init__(self):
        if self.fiber.dim != 2:
            raise ValueError("product fiber must be 2-dimensional")


@dataclass(frozen=True)
class RadialPotential:
    """Radial potential f(r) with f(0) = 0 and derivatives available."""

    f: Callable[[float], float]
    fp: Callable[[float], float]
    fpp: Callable[[float], float]

    def grad_norm(self, r: float) -> float:
        return abs(self.fp(r))


@dataclass(frozen=True)
class ProductPotential:
    """Potential slope*s + fbar(sigma) on a product metric.

    The line part is affine (zero Hessian), matching the flat factor's zero
    Ricci; the fiber part is a radial potential of the fiber.
    """

    slope: float
    fiber: RadialPotential

    def value(self, s: float, sigma: float) -> float:
        return self.slope * s + self.fiber.f(sigma)

    def grad(self, s: float, sigma: float) -> Tuple[float, float]:
        return self.slope, self.fiber.fp(sigma)

    def grad_norm(self, s: float, sigma: float) -> float:
        return math.hypot(self.slope, self.fiber.fp(sigma))


@dataclass(frozen=True)
class CurvatureSample:
    """Pointwise curvature of a warped or product metric.

    ``K_rad`` is None for 2-d metrics (there is a single plane; its curvature
    sits in ``K_sph`` and R = 2 K_sph).  For products, components involving
    the line factor are exactly zero.
    """

    r: float
    K_rad: Optional[float]
    K_sph: float
    Ric_rad: float
    Ric_tan: float
    R: float

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "K_rad": self.K_rad,
            "K_sph": self.K_sph,
            "Ric_rad": self.Ric_rad,
            "Ric_tan": self.Ric_tan,
            "R": self.R,
        }


@dataclass(frozen=True)
class GeodesicPath:
    start: tuple
    end: tuple
    length: float
    tangent_at_end: Tuple[float, float]


def _pole_w3(metric: WarpedMetric, r: float) -> float:
    # w'' ~ 6 w3 r near the pole; sample at the cutoff if r is tiny
    rs = max(r, POLE_CUTOFF * 0.1)
    return metric.wpp(rs) / (6.0 * rs)


def curvature_at(metric, point) -> CurvatureSample:
    """Curvature components at a point.

    For ``WarpedMetric`` the point is a radius; for ``ProductMetric`` it is
    ``(s, sigma)``.  Below ``POLE_CUTOFF`` the smooth-pole series replaces
    the 0/0 expression for K_sph.
    """
    if isinstance(metric, ProductMetric):
        s, sigma = point
        fib = curvature_at(metric.fiber, sigma)
        k = fib.K_sph
        # planes containing the flat line direction are flat
        return CurvatureSample(r=sigma, K_rad=0.0, K_sph=k,
                               Ric_rad=0.0, Ric_tan=k, R=2.0 * k)

    r = metric.check_radius(point)
    if r < POLE_CUTOFF:
        w3 = _pole_w3(metric, max(r, POLE_CUTOFF))
        k_rad = -6.0 * w3
        k_sph = k_rad
    else:
        w = metric.w(r)
        k_rad = -metric.wpp(r) / w
        k_sph = (1.0 - metric.wp(r) ** 2) / (w * w)

    if metric.dim == 2:
        # single sectional curvature; keep it in the orbit slot by convention
        return CurvatureSample(r=r, K_rad=None, K_sph=k_rad,
                               Ric_rad=k_rad, Ric_tan=k_rad, R=2.0 * k_rad)
    return CurvatureSample(
        r=r,
        K_rad=k_rad,
        K_sph=k_sph,
        Ric_rad=2.0 * k_rad,
        Ric_tan=k_rad + k_sph,
        R=4.0 * k_rad + 2.0 * k_sph,
    )


def soliton_residual(metric, potential, point) -> Tuple[float, float]:
    """Residual of the steady soliton equation Hess f = Ric.

    Returns the radial and tangential components of Hess f - Ric; both
    vanish (within tolerance) exactly when the pair (metric, potential)
    is a gradient steady soliton at the point.
    """
    if isinstance(metric, ProductMetric):
        s, sigma = point
        fib_res = soliton_residual(metric.fiber, potential.fiber, sigma)
        # the affine line part has zero Hessian against zero Ricci
        return fib_res

    r = metric.check_radius(point)
    cs = curvature_at(metric, r)
    if r < POLE_CUTOFF:
        # Hess f ~ fpp(r) g at the pole by isotropy
        res_rad = potential.fpp(r) - cs.Ric_rad
        res_tan = potential.fpp(r) - cs.Ric_tan
        return res_rad, res_tan
    w = metric.w(r)
    res_rad = potential.fpp(r) - cs.Ric_rad
    res_tan = potential.fp(r) * metric.wp(r) / w - cs.Ric_tan
    return res_rad, res_tan


def conserved_quantity(metric, potential, point) -> float:
    """R + |grad f|^2 at the point; constant on any gradient steady soliton."""
    if isinstance(metric, ProductMetric):
        s, sigma = point
        cs = curvature_at(metric, point)
        return cs.R + potential.grad_norm(s, sigma) ** 2
    r = metric.check_radius(point)
    cs = curvature_at(metric, r)
    return cs.R + potential.fp(r) ** 2


# ---------------------------------------------------------------------------
# geodesics
# ---------------------------------------------------------------------------

def _radial_path(p, q, length) -> GeodesicPath:
    sign = 1.0 if q[0] >= p[0] else -1.0
    return GeodesicPath(start=p, end=q, length=length,
                        tangent_at_end=(sign, 0.0))


def _shoot(metric: WarpedMetric, r0, psi, phi_target, rtol):
    """Integrate the meridian geodesic ODE from (r0, 0) with launch angle psi.

    Unit-speed equations in the totally geodesic slice dr^2 + w^2 dphi^2:
        r''   = w w' phi'^2
        phi'' = -2 (w'/w) r' phi'
    Stops when phi reaches phi_target; returns (r, arclength, dr/dt, dphi/dt)
    there, or None if the slice is exited first.
    """
    w0 = metric.w(r0)

    def rhs(t, y):
        r, phi, pr, pphi = y
        w = metric.w(r)
        wp = metric.wp(r)
        return [pr, pphi, w * wp * pphi * pphi, -2.0 * (wp / w) * pr * pphi]

    def hit(t, y):
        return y[1] - phi_target

    hit.terminal = True
    hit.direction = 1.0

    def leave(t, y):
        return y[0] - metric.domain_max * 0.999

    leave.terminal = True

    def pole(t, y):
        return y[0] - POLE_CUTOFF

    pole.terminal = True
    pole.direction = -1.0

    y0 = [r0, 0.0, math.cos(psi), math.sin(psi) / w0]
    t_max = 4.0 * (metric.domain_max + w0 * phi_target + r0)
    sol = solve_ivp(rhs, (0.0, t_max), y0, events=(hit, leave, pole),
                    rtol=rtol, atol=rtol, method="RK45", max_step=t_max / 50)
    if sol.t_events[0].size:
        y = sol.y_events[0][0]
        return y[0], sol.t_events[0][0], y[2], y[3]
    return None


def _meridian_geodesic(metric: WarpedMetric, p, q, rtol) -> GeodesicPath:
    """Two-point solve in the meridian slice by bisection on the launch angle."""
    r0, r1 = p[0], q[0]
    dphi = abs(q[1] - p[1])

    def miss(psi):
        out = _shoot(metric, r0, psi, dphi, rtol)
        if out is None:
            return None
        return out[0] - r1, out

    # bracket a sign change of the radial miss distance over launch angles
    n_scan = 41
    psis = np.linspace(1e-3, math.pi - 1e-3, n_scan)
    prev = None
    best = None
    for psi in psis:
        cur = miss(psi)
        if cur is None:
            prev = None
            continue
        if best is None or abs(cur[0]) < abs(best[1][0]):
            best = (psi, cur)
        if prev is not None and prev[1][0] * cur[0] < 0.0:
            lo, hi = prev[0], psi
            flo = prev[1][0]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = miss(mid)
                if fm is None:
                    break
                if abs(fm[0]) < 1e-10 * max(1.0, r1):
                    best = (mid, fm)
                    break
                if flo * fm[0] < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm[0]
                best = (mid, fm)
            r_end, length, pr, pphi = best[1][1]
            w_end = metric.w(r_end)
            return GeodesicPath(start=p, end=q, length=length,
                                tangent_at_end=(pr, pphi * w_end))
        prev = (psi, cur)

    chord = abs(r1 - r0) + min(metric.w(r0), metric.w(r1)) * dphi
    raise GeodesicError(
        f"geodesic shooting did not bracket the target (best radial miss "
        f"{best[1][0] if best else 'n/a'})",
        best_bound=chord,
    )


def geodesic(metric, p, q, resolution: float = 1e-9) -> GeodesicPath:
    """Minimizing geodesic between two points.

    Points are ``(r, phi)`` on a warped metric (phi the angle along a great
    circle through both points; the meridian slice is totally geodesic) and
    ``(s, sigma, theta)`` on a product, where the path splits into a line
    segment and a fiber geodesic.

    Radial segments and paths from the pole are returned exactly.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if isinstance(metric, ProductMetric):
        s0, s1 = p[0], q[0]
        fp_, fq = p[1:], q[1:]
        if fp_ == fq:
            fiber_len = 0.0
            fiber_tan = (0.0, 0.0)
        else:
            fib = geodesic(metric.fiber, fp_, fq, resolution)
            fiber_len = fib.length
            fiber_tan = fib.tangent_at_end
        ds = s1 - s0
        length = math.hypot(ds, fiber_len)
        if length == 0.0:
            raise ValueError("geodesic endpoints coincide")
        tan_s = ds / length
        tan_f = fiber_len / length
        return GeodesicPath(start=p, end=q, length=length,
                            tangent_at_end=(tan_s, tan_f * fiber_tan[0]))

    p = (metric.check_radius(p[0]), float(p[1]))
    q = (metric.check_radius(q[0]), float(q[1]))
    if p == q:
        raise ValueError("geodesic endpoints coincide")
    dphi = abs(q[1] - p[1])
    if dphi < 1e-14:
        return _radial_path(p, q, abs(q[0] - p[0]))
    if p[0] < POLE_CUTOFF:
        # geodesics through the pole are radial in every direction
        return _radial_path((0.0, q[1]), q, q[0])
    if q[0] < POLE_CUTOFF:
        back = _radial_path((0.0, p[1]), p, p[0])
        return GeodesicPath(start=p, end=q, length=back.length,
                            tangent_at_end=(-1.0, 0.0))
    return _meridian_geodesic(metric, p, q, resolution)
