"""Asymptotic constants, angle estimates, volume ratios, and point-picking.

Four groups of analyses live here:

* growth fitting -- dimensionless products (R*s, D/sqrt(s), D/lam, R*D^2,
  A/lam, V/lam^2) fitted over a level window with convergence diagnostics;
* integral-curve limits and distance sandwiches -- the limiting gradient
  norm zeta and limiting scalar curvature along curves of grad f/|grad f|^2,
  plus the f(p) vs distance comparison;
* angle checks -- the inner product between the arrival direction of a
  minimizing geodesic and the level-set normal, including the obstruction
  profile on the line-times-cigar model where the angle stays bounded away
  from zero;
* point-picking -- selection of centers q_j with radii r_j so that curvature
  is almost maximal on each ball, r_j^2 R(q_j) grows without bound, and the
  balls are pairwise disjoint; refuses models where R*D^2 stays bounded.

Level-surface diameters on the product model come from shortest paths on a
graph mesh of the surface (no symmetry shortcut exists there); the mesh is
Richardson-checked at double resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .bryant import SolitonProfile
from .models import CigarLine
from .warped import geodesic

__all__ = [
    "GrowthReport",
    "CurveLimitRecord",
    "PickPoint",
    "PickSequence",
    "WindowTooShortError",
    "RDSquaredBoundedError",
    "asymptotic_constants",
    "curve_limits",
    "sandwich_check",
    "angle_check",
    "angle_profile",
    "bishop_gromov_scan",
    "level_surface_diameter",
    "pick_points",
    "audit_pick",
]

#: minimum window width (ratio of endpoints) for stable asymptotic fits
MIN_WINDOW_RATIO = 2.0

OMEGA_3 = 4.0 * math.pi / 3.0  # unit-ball volume in dimension 3


class WindowTooShortError(ValueError):
    """Fit window too short for a stable estimate; raise r_max."""


class RDSquaredBoundedError(ValueError):
    """Model has bounded R*D^2; point-picking cannot proceed."""

    def __init__(self, message, bound):
        super().__init__(message)
        self.bound = bound


@dataclass(frozen=True)
class GrowthReport:
    """Fitted constant/exponent of one dimensionless product over a window."""

    name: str
    window: tuple
    constant: float
    exponent: float
    #: relative spread of the raw values over the window's last half
    diagnostic: float

    def __post_init__(self):
        if not (math.isfinite(self.constant) and math.isfinite(self.exponent)):
            raise ValueError("fit produced non-finite values")
        if self.diagnostic < 0:
            raise ValueError("diagnostic must be nonnegative")


@dataclass(frozen=True)
class CurveLimitRecord:
    """Limits along an integral curve of grad f / |grad f|^2."""

    curve_id: str
    zeta: float       # limiting |grad f|
    R_limit: float    # limiting scalar curvature
    spread: float     # extrapolation spread (convergence diagnostic)

    def closure_residual(self, conserved: float = 1.0) -> float:
        return abs(self.zeta**2 + self.R_limit - conserved)


# ---------------------------------------------------------------------------
# growth fitting
# ---------------------------------------------------------------------------

def _fit_report(name: str, lam: np.ndarray, vals: np.ndarray,
                window: tuple) -> GrowthReport:
    logl, logv = np.log(lam), np.log(vals)
    exponent, logc = np.polyfit(logl, logv, 1)
    tail = vals[lam >= 0.5 * (lam[0] + lam[-1])]
    mid = 0.5 * (tail.max() + tail.min())
    diagnostic = float((tail.max() - tail.min()) / abs(mid))
    return GrowthReport(name=name, window=window, constant=float(math.exp(logc)),
                        exponent=float(exponent), diagnostic=diagnostic)


def asymptotic_constants(profile: SolitonProfile, window=(50.0, 200.0),
                         n: int = 31) -> dict:
    """GrowthReports for the six dimensionless products over the level window.

    Also asserts D/lam strictly decreasing across the window.  Raises
    WindowTooShortError when the window cannot support a stable fit (too
    narrow, or beyond the integrated range).
    """
    lo, hi = float(window[0]), float(window[1])
    if hi > profile.f_max or hi < lo * MIN_WINDOW_RATIO:
        raise WindowTooShortError(
            f"window [{lo}, {hi}] too short or beyond f(r_max)="
            f"{profile.f_max:.4g}; raise r_max")
    lam = np.linspace(lo, hi, n)
    r = np.array([profile.invert_potential(l) for l in lam])
    w = profile.w_at(r)
    R = profile.scalar_curvature(r)
    D = math.pi * w
    area = 4.0 * math.pi * w**2
    vol = profile.volume_to(r)
    series = {
        "R_times_s": R * r,
        "D_over_sqrt_s": D / np.sqrt(r),
        "D_over_lambda": D / lam,
        "R_times_D_squared": R * D**2,
        "A_over_lambda": area / lam,
        "V_over_lambda_squared": vol / lam**2,
    }
    if np.any(np.diff(series["D_over_lambda"]) >= 0):
        raise ValueError("D/lambda failed to decrease across the window")
    return {name: _fit_report(name, lam, vals, (lo, hi))
            for name, vals in series.items()}


# ---------------------------------------------------------------------------
# curve limits and sandwiches
# ---------------------------------------------------------------------------

def _extrapolate_in_inverse(lams, vals):
    """Least-squares limit of vals against 1/lam; (limit, spread)."""
    lams = np.asarray(lams, dtype=float)
    vals = np.asarray(vals, dtype=float)
    coef = np.polyfit(1.0 / lams, vals, 1)
    limit = float(coef[1])
    half = np.polyfit(1.0 / lams[len(lams) // 2:], vals[len(lams) // 2:], 1)
    spread = abs(limit - float(half[1])) + float(np.ptp(vals[len(vals) // 2:]))
    return limit, spread


def curve_limits(source, curve_id: str = "radial",
                 lam_max: float | None = None) -> CurveLimitRecord:
    """zeta and limiting R along an integral curve of grad f/|grad f|^2.

    ``source`` is a SolitonProfile (curve_id "radial") or a CigarLine
    (curve_id "sigma0=<value>", the curve launched from (s=0, sigma0)).
    """
    if isinstance(source, SolitonProfile):
        top = source.f_max if lam_max is None else lam_max
        lams = np.linspace(0.5 * top, top, 12)
        rs = np.array([source.invert_potential(l) for l in lams])
        zeta, s1 = _extrapolate_in_inverse(lams, source.fp_at(rs))
        r_lim, s2 = _extrapolate_in_inverse(lams, source.scalar_curvature(rs))
        rec = CurveLimitRecord(curve_id="radial", zeta=zeta,
                               R_limit=max(r_lim, 0.0), spread=s1 + s2)
        if np.any(np.diff(source.fp_at(rs)) < 0):
            raise ValueError("|grad f| must be nondecreasing along the curve")
        return rec

    model: CigarLine = source
    if not curve_id.startswith("sigma0="):
        raise ValueError("product-model curve ids look like 'sigma0=<value>'")
    sigma0 = float(curve_id.split("=", 1)[1])
    pot = model.fiber().potential()
    c2 = model.slope
    top = 400.0 if lam_max is None else lam_max

    def rhs(lam, y):
        # d(s, sigma)/dlam = grad f / |grad f|^2
        fbp = pot.fp(y[1])
        g2 = c2 * c2 + fbp * fbp
        return [c2 / g2, fbp / g2]

    lam0 = c2 * 0.0 + pot.f(sigma0)
    lams = np.linspace(max(lam0 + 1.0, 0.5 * top), top, 12)
    sol = solve_ivp(rhs, (lam0, top), [0.0, sigma0], t_eval=lams,
                    rtol=1e-10, atol=1e-12, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"integral-curve solve failed: {sol.message}")
    sig = sol.y[1]
    grad = np.hypot(c2, [pot.fp(s) for s in sig])
    Rvals = model.fiber().scalar_curvature(sig)
    if sigma0 == 0.0:
        # gradient is purely along the line; closed form, no extrapolation
        return CurveLimitRecord(curve_id=curve_id, zeta=c2,
                                R_limit=model.limit_curvature, spread=0.0)
    zeta, s1 = _extrapolate_in_inverse(lams, grad)
    r_lim, s2 = _extrapolate_in_inverse(lams, Rvals)
    return CurveLimitRecord(curve_id=curve_id, zeta=zeta,
                            R_limit=max(r_lim, 0.0), spread=s1 + s2)


def sandwich_check(profile: SolitonProfile, distances: Sequence[float],
                   delta: float = 0.05) -> dict:
    """Compare f against distance from the origin at the given radii.

    Verifies the strict bound f(p) < s everywhere (|grad f| < 1) and finds
    the measured threshold s_bar beyond which f/s >= 1 - delta.
    """
    distances = np.asarray(distances, dtype=float)
    f_vals = profile.f_at(distances)
    ratios = f_vals / distances
    if np.any(f_vals >= distances):
        raise ValueError("f must stay strictly below the distance")
    ok = ratios >= 1.0 - delta
    s_bar = float(distances[np.argmax(ok)]) if ok.any() else math.inf
    return {
        "distances": distances,
        "ratios": ratios,
        "delta": delta,
        "s_bar": s_bar,
        "worst_tail_ratio": float(ratios[-1]),
    }


# ---------------------------------------------------------------------------
# angle checks
# ---------------------------------------------------------------------------

def angle_check(model, base, target) -> dict:
    """cos of the angle between geodesic arrival direction and the normal.

    ``model`` is a CigarLine (points are (s, sigma, theta)) or a
    SolitonProfile (points are (r, phi)).  Returns the cosine, the gradient
    norm at the target, and the mean-value lower bound
    (f(target) - f(base)) / length, asserting the inequality
    |grad f| cos(theta) >= that bound.
    """
    if isinstance(model, SolitonProfile):
        metric = model.metric()
        path = geodesic(metric, base, target)
        grad = float(model.fp_at(target[0]))
        # normal is radial; arrival tangent's radial component gives the cos
        cos_theta = path.tangent_at_end[0]
        f_gap = float(model.f_at(target[0]) - model.f_at(base[0]))
    else:
        metric = model.metric()
        pot = model.potential()
        path = geodesic(metric, base, target)
        s_t, sigma_t = target[0], target[1]
        gs, gsig = pot.grad(s_t, sigma_t)
        grad = math.hypot(gs, gsig)
        tan_s, tan_sig = path.tangent_at_end
        cos_theta = (tan_s * gs + tan_sig * gsig) / grad
        f_gap = pot.value(s_t, sigma_t) - pot.value(base[0], base[1])
    bound = f_gap / path.length
    if grad * cos_theta < bound - 1e-9:
        raise ValueError(
            f"mean-value angle inequality violated: |grad f| cos theta = "
            f"{grad * cos_theta:.6g} < {bound:.6g}")
    return {"cos_theta": float(cos_theta), "grad_norm": grad,
            "bound": float(bound), "length": path.length}


def angle_profile(model: CigarLine, base_s: float, lam: float,
                  n: int = 60) -> dict:
    """Figure-style obstruction profile: cos(theta) across one level surface.

    From the base point (base_s, fiber pole), geodesics to targets spread
    over the level {c2 s + fbar(sigma) = lam} arrive increasingly athwart
    the normal as sigma grows; min cos(theta) stays bounded away from 1
    whenever the core curvature is positive.
    """
    pot = model.fiber().potential()
    c2 = model.slope
    sigma_max = _sigma_at_level(model, lam)
    sigmas = np.linspace(0.0, sigma_max, n)
    cos_vals, bounds = [], []
    for sigma in sigmas:
        s_t = (lam - pot.f(sigma)) / c2
        res = angle_check(model, (base_s, 0.0, 0.0), (s_t, sigma, 0.0))
        cos_vals.append(res["cos_theta"])
        bounds.append(res["bound"])
    return {"sigma": sigmas, "cos_theta": np.array(cos_vals),
            "bound": np.array(bounds),
            "min_cos_theta": float(np.min(cos_vals))}


# ---------------------------------------------------------------------------
# volume comparison
# ---------------------------------------------------------------------------

def bishop_gromov_scan(profile: SolitonProfile,
                       radii: Sequence[float]) -> dict:
    """Ball-volume ratios vol B(O, r) / (omega_3 r^3) plus the limit estimate.

    The ratio must be non-increasing in r (positive Ricci curvature); the
    estimate at the largest radius bounds the asymptotic volume ratio.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    vols = profile.volume_to(radii)
    ratios = vols / (OMEGA_3 * radii**3)
    worst = float(np.max(np.diff(ratios)))
    return {"radii": radii, "ratios": ratios,
            "worst_increase": worst,
            "alpha_estimate": float(ratios[-1])}


# ---------------------------------------------------------------------------
# level-surface mesh diameters on the product model
# ---------------------------------------------------------------------------

def _sigma_at_level(model: CigarLine, lam: float) -> float:
    """Largest sigma on the level surface (where the s >= 0 cut bites)."""
    a = model.scale
    # 2 ln cosh(a sigma) = lam  ->  sigma = arccosh(exp(lam/2)) / a
    return math.acosh(math.exp(lam / 2.0)) / a


def _mesh_graph(model: CigarLine, lam: float, n_sigma: int, n_theta: int):
    """Weighted graph on the level surface {c2 s + fbar(sigma) = lam, s >= 0}.

    Induced metric in the (sigma, theta) chart:
        (1 + fbar'(sigma)^2 / c2^2) dsigma^2 + w(sigma)^2 dtheta^2
    Nodes: a single pole node (sigma = 0) plus n_sigma rings of n_theta
    nodes; edges connect ring/angle neighbours, diagonals, and knight moves
    to tighten the metric approximation.
    """
    a, c2 = model.scale, model.slope
    pot = model.fiber().potential()
    sigma_max = _sigma_at_level(model, lam)
    sigmas = np.linspace(0.0, sigma_max, n_sigma + 1)
    # meridian arc length from the pole, on a refined grid
    fine = np.linspace(0.0, sigma_max, 8 * n_sigma + 1)
    mer = np.sqrt(1.0 + np.array([pot.fp(s) for s in fine]) ** 2 / c2**2)
    arc_fine = np.concatenate([[0.0], np.cumsum(
        0.5 * (mer[1:] + mer[:-1]) * np.diff(fine))])
    arc = np.interp(sigmas, fine, arc_fine)
    w = np.tanh(a * sigmas) / a
    dtheta = 2.0 * math.pi / n_theta

    def node(i, j):
        return 0 if i == 0 else 1 + (i - 1) * n_theta + (j % n_theta)

    rows, cols, vals = [], [], []

    def add(u, v, wgt):
        rows.append(u)
        cols.append(v)
        vals.append(wgt)

    for j in range(n_theta):
        add(node(0, 0), node(1, j), arc[1])
    for i in range(1, n_sigma + 1):
        for j in range(n_theta):
            u = node(i, j)
            add(u, node(i, j + 1), w[i] * dtheta)
            if i < n_sigma:
                da = arc[i + 1] - arc[i]
                wmid = 0.5 * (w[i] + w[i + 1])
                add(u, node(i + 1, j), da)
                add(u, node(i + 1, j + 1), math.hypot(da, wmid * dtheta))
                add(u, node(i + 1, j - 1), math.hypot(da, wmid * dtheta))
                add(u, node(i + 1, j + 2), math.hypot(da, 2 * wmid * dtheta))
                add(u, node(i + 1, j - 2), math.hypot(da, 2 * wmid * dtheta))
            if i + 2 <= n_sigma:
                da2 = arc[i + 2] - arc[i]
                wmid2 = 0.5 * (w[i] + w[i + 2])
                add(u, node(i + 2, j + 1), math.hypot(da2, wmid2 * dtheta))
                add(u, node(i + 2, j - 1), math.hypot(da2, wmid2 * dtheta))
    n_nodes = 1 + n_sigma * n_theta
    graph = coo_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes))
    sources = [node(i, 0) for i in range(n_sigma + 1)]
    return graph.tocsr(), sources


def level_surface_diameter(model: CigarLine, lam: float,
                           n_sigma: int = 96, n_theta: int = 36,
                           richardson: bool = False) -> float:
    """Diameter of the level surface by graph shortest paths.

    By rotational symmetry, shortest-path distances from one theta column of
    sources reach every equivalence class of point pairs, so the maximum
    over that distance matrix is the diameter.  With ``richardson`` the mesh
    is re-solved at double resolution and the extrapolated value returned.
    """
    if lam <= 0:
        raise ValueError("level must be positive")

    def solve(ns, nt):
        graph, sources = _mesh_graph(model, lam, ns, nt)
        dist = dijkstra(graph, directed=False, indices=sources)
        return float(dist.max())

    d1 = solve(n_sigma, n_theta)
    if not richardson:
        return d1
    d2 = solve(2 * n_sigma, 2 * n_theta)
    # first-order mesh bias: extrapolate d = d2 + (d2 - d1)
    return 2.0 * d2 - d1


# ---------------------------------------------------------------------------
# point-picking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PickPoint:
    j: int
    schedule_index: int
    q: tuple            # (s, sigma) with sigma = 0 at the fiber pole
    r: float
    eps: float
    A: float
    sigma_j: float      # diameter threshold sqrt(A_j / R_core)
    delta: float
    s_dist: float       # distance from the base point
    lam_level: float    # potential level of q
    lam_ratio: float    # s_dist / r
    r2R: float          # r^2 R(q)


@dataclass(frozen=True)
class PickSequence:
    model_rhat: float
    points: tuple

    def __post_init__(self):
        pts = self.points
        if any(pts[i].r2R >= pts[i + 1].r2R for i in range(len(pts) - 1)):
            raise ValueError("r^2 R(q_j) must be strictly increasing")
        if any(pts[i].lam_ratio >= pts[i + 1].lam_ratio
               for i in range(len(pts) - 1)):
            raise ValueError("s_j / r_j must be strictly increasing")
        for i in range(len(pts)):
            for k in range(i + 1, len(pts)):
                gap = abs(pts[i].q[0] - pts[k].q[0])
                if gap <= pts[i].r + pts[k].r:
                    raise ValueError("balls must be pairwise disjoint")


def _default_eps(j):
    return 1.0 / math.sqrt(j)


def _default_A(j):
    return float(j * j)


def pick_points(model, eps_schedule: Callable[[int], float] | None = None,
                A_schedule: Callable[[int], float] | None = None,
                j_max: int = 6, n_sigma: int = 96, n_theta: int = 36) -> PickSequence:
    """Select centers/radii with near-maximal curvature and growing r^2 R.

    On the line-times-cigar model, curvature is maximal along the fiber-pole
    axis, so each center sits at the pole of a level surface whose measured
    diameter equals the threshold sigma_j = sqrt(A_j / R_core); delta_j = 0
    because no point beats the core curvature.  A greedy subsequence of the
    schedule enforces increasing s_j/r_j and pairwise-disjoint balls.

    A SolitonProfile input is refused with the measured R*D^2 bound: its
    level diameters satisfy R*D^2 bounded, so sigma_j eventually exceeds
    every level diameter and the construction cannot continue.
    """
    if isinstance(model, SolitonProfile):
        reports = asymptotic_constants(model)
        bound = reports["R_times_D_squared"].constant
        raise RDSquaredBoundedError(
            f"R*D^2 is bounded (measured ~{bound:.4g}); point-picking "
            "requires it unbounded", bound=bound)

    eps_schedule = eps_schedule or _default_eps
    A_schedule = A_schedule or _default_A
    # schedule sanity: eps decreasing to 0, A increasing, A*eps^2 increasing
    probe = range(1, 12)
    eps_vals = [eps_schedule(j) for j in probe]
    a_vals = [A_schedule(j) for j in probe]
    prod = [a * e * e for a, e in zip(a_vals, eps_vals)]
    if (any(np.diff(eps_vals) >= 0) or any(np.diff(a_vals) <= 0)
            or any(np.diff(prod) <= 0)):
        raise ValueError(
            "schedules must satisfy eps_j decreasing, A_j increasing, "
            "A_j eps_j^2 increasing")

    rhat = model.limit_curvature
    c2 = model.slope
    pot = model.fiber().potential()

    # measured diameter-vs-level curve, monotone by construction
    lam_grid = np.linspace(1.0, 70.0, 24)
    diams = np.array([level_surface_diameter(model, l, n_sigma, n_theta)
                      for l in lam_grid])
    if np.any(np.diff(diams) <= 0):
        raise RuntimeError("measured diameters failed to be increasing")

    points = []
    prev = None
    m = 0
    while len(points) < j_max:
        m += 1
        if m > 4000:
            raise RuntimeError("schedule exhausted before j_max points")
        eps_m, a_m = eps_schedule(m), A_schedule(m)
        sigma_j = math.sqrt(a_m / rhat)
        if sigma_j < diams[0] or sigma_j > diams[-1]:
            if sigma_j > diams[-1]:
                raise RuntimeError(
                    "diameter table too short for the schedule; "
                    "extend the level grid")
            continue
        lam_level = float(np.interp(sigma_j, diams, lam_grid))
        s_q = lam_level / c2          # fiber-pole point on that level
        r_m = eps_m * sigma_j
        lam_ratio = s_q / r_m
        if prev is not None:
            if lam_ratio <= prev.lam_ratio:
                continue
            if any(abs(s_q - p.q[0]) <= r_m + p.r for p in points):
                continue
            if eps_m * eps_m * a_m <= prev.r2R:
                continue
        cand = PickPoint(
            j=len(points) + 1, schedule_index=m, q=(s_q, 0.0), r=r_m,
            eps=eps_m, A=a_m, sigma_j=sigma_j, delta=0.0, s_dist=s_q,
            lam_level=lam_level, lam_ratio=lam_ratio,
            r2R=eps_m * eps_m * a_m)
        points.append(cand)
        prev = cand
    return PickSequence(model_rhat=rhat, points=tuple(points))


def audit_pick(model: CigarLine, seq: PickSequence, n_ball: int = 40) -> dict:
    """Independent brute-force re-check of a pick sequence.

    Scans each ball with a polar sample grid, comparing curvature against
    (1 + delta_j) R(q_j) directly from the closed-form curvature; re-checks
    growth, ordering, and disjointness without trusting the construction.
    """
    rhat = model.limit_curvature
    worst_excess = -math.inf
    for p in seq.points:
        # points of the ball: (s, sigma) with hypot(s - s_q, sigma) <= r
        radii = np.linspace(0.0, p.r, n_ball)
        angles = np.linspace(0.0, math.pi, n_ball)
        for rr in radii:
            sig = rr * np.sin(angles)
            rvals = model.fiber().scalar_curvature(sig)
            worst_excess = max(worst_excess,
                               float(np.max(rvals) - (1.0 + p.delta) * rhat))
    r2R = [p.r * p.r * model.fiber().scalar_curvature(p.q[1]) for p in seq.points]
    ratios = [p.s_dist / p.r for p in seq.points]
    disjoint = all(
        abs(seq.points[i].q[0] - seq.points[k].q[0])
        > seq.points[i].r + seq.points[k].r
        for i in range(len(seq.points)) for k in range(i + 1, len(seq.points)))
    return {
        "max_curvature_excess": worst_excess,   # must be <= 0
        "r2R_increasing": bool(np.all(np.diff(r2R) > 0)),
        "lam_ratio_increasing": bool(np.all(np.diff(ratios) > 0)),
        "balls_disjoint": disjoint,
    }
