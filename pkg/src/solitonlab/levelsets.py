"""Per-level geometry of the potential's level spheres on the 3-d soliton.

Every level set {f = lam} is a round 2-sphere of radius w(r(lam)), so all of
its integral geometry reduces to closed forms in (w, w', f') at the level
radius:

    area            = 4 pi w^2
    inner diameter  = pi w
    |grad f|        = f'
    mean curvature  = 2 w'/w
    int det(II)     = 4 pi w'^2
    int K_ambient   = 4 pi (1 - w'^2)
    int K_induced   = int K_ambient + int det(II) = 4 pi   (Gauss equation)

The finite-difference checks in this module deliberately avoid reusing the
closed forms they test: left-hand sides come from centered differences of
independently computed level data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .bryant import SolitonProfile

__all__ = [
    "LevelSetRecord",
    "VolumeRecord",
    "record",
    "volume_record",
    "area_ode_check",
    "coarea_second_derivative_check",
    "detII_monotonicity_scan",
    "growth_tables",
    "diameter_drop_bound",
]

#: below this level f' is so small that 1/f'^3 amplifies noise beyond use;
#: the second-derivative coarea check refuses smaller levels
COAREA_LEVEL_FLOOR = 0.5

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class LevelSetRecord:
    """Integral geometry of one level sphere {f = lam}."""

    lam: float
    r: float
    area: float
    diameter_inner: float
    grad_norm: float
    mean_curvature: float
    detII_integral: float
    km_integral: float
    induced_K_integral: float
    R: float

    def __post_init__(self):
        if abs(self.induced_K_integral - FOUR_PI) > 1e-9:
            raise ValueError("total induced curvature must close to 4*pi")
        if not 0.0 < self.detII_integral <= FOUR_PI:
            raise ValueError("int det(II) must lie in (0, 4*pi]")
        if not 0.0 <= self.km_integral < FOUR_PI:
            raise ValueError("int K_ambient must lie in [0, 4*pi)")
        if not 0.0 <= self.grad_norm < 1.0:
            raise ValueError("|grad f| must lie in [0, 1)")


@dataclass(frozen=True)
class VolumeRecord:
    """Sublevel volume and the flux integral driving its growth."""

    lam: float
    volume: float
    coarea_flux: float  # int over the level of 1/|grad f| = 4 pi w^2 / f'


def record(profile: SolitonProfile, lam: float) -> LevelSetRecord:
    """All level-sphere quantities at level lam; invariants asserted."""
    r = profile.invert_potential(lam)
    w = float(profile.w_at(r))
    x = float(profile.wp_at(r))
    u = float(profile.fp_at(r))
    return LevelSetRecord(
        lam=float(lam),
        r=r,
        area=FOUR_PI * w * w,
        diameter_inner=math.pi * w,
        grad_norm=u,
        mean_curvature=2.0 * x / w,
        detII_integral=FOUR_PI * x * x,
        km_integral=FOUR_PI * (1.0 - x * x),
        induced_K_integral=FOUR_PI * (1.0 - x * x) + FOUR_PI * x * x,
        R=float(profile.scalar_curvature(r)),
    )


def volume_record(profile: SolitonProfile, lam: float) -> VolumeRecord:
    r = profile.invert_potential(lam)
    w = float(profile.w_at(r))
    u = float(profile.fp_at(r))
    return VolumeRecord(lam=float(lam), volume=float(profile.volume_to(r)),
                        coarea_flux=FOUR_PI * w * w / u)


def _default_step(lam: float, h: float | None) -> float:
    return 1e-3 * lam if h is None else float(h)


def area_ode_check(profile: SolitonProfile, lam: float,
                   h: float | None = None) -> Tuple[float, float]:
    """(lhs, rhs) of dA/dlam = int H/|grad f| over the level sphere.

    lhs is a centered difference of independently computed areas; rhs is the
    closed-form flux 8 pi w w'/f' at the level radius.
    """
    h = _default_step(lam, h)
    a_plus = record(profile, lam + h).area
    a_minus = record(profile, lam - h).area
    lhs = (a_plus - a_minus) / (2.0 * h)
    rec = record(profile, lam)
    r = rec.r
    w = float(profile.w_at(r))
    x = float(profile.wp_at(r))
    u = float(profile.fp_at(r))
    rhs = 8.0 * math.pi * w * x / u
    return lhs, rhs


def coarea_second_derivative_check(profile: SolitonProfile, lam: float,
                                   h: float | None = None) -> Tuple[float, float]:
    """(lhs, rhs) of d/dlam of the coarea flux = 8 pi (1 - w'^2)/f'^3.

    Refuses levels below COAREA_LEVEL_FLOOR where f' -> 0 makes both sides
    blow up.  rhs > 0 always, which is the strict convexity of the sublevel
    volume as a function of the level.
    """
    if lam < COAREA_LEVEL_FLOOR:
        raise ValueError(
            f"level {lam} below the documented floor {COAREA_LEVEL_FLOOR}")
    h = _default_step(lam, h)
    flux = lambda l: volume_record(profile, l).coarea_flux
    lhs = (flux(lam + h) - flux(lam - h)) / (2.0 * h)
    r = profile.invert_potential(lam)
    x = float(profile.wp_at(r))
    u = float(profile.fp_at(r))
    rhs = 8.0 * math.pi * (1.0 - x * x) / u**3
    return lhs, rhs


def detII_monotonicity_scan(profile: SolitonProfile,
                            lam_grid: Sequence[float]) -> float:
    """Worst adjacent increase of int det(II) along the grid (must be <= 0)."""
    lam_grid = np.asarray(lam_grid, dtype=float)
    if np.any(np.diff(lam_grid) <= 0):
        raise ValueError("level grid must be strictly increasing")
    vals = np.array([record(profile, l).detII_integral for l in lam_grid])
    return float(np.max(np.diff(vals)))


def growth_tables(profile: SolitonProfile, lam_grid: Sequence[float]) -> dict:
    """Per-level series plus doubling ratios for the growth laws.

    Returns arrays keyed lambda, r, area, volume, diameter, grad_norm,
    detII_int, km_int, R, R_times_lambda, and (where 2*lambda stays in
    range) area_doubling and volume_doubling.
    """
    lam_grid = np.asarray(lam_grid, dtype=float)
    recs = [record(profile, l) for l in lam_grid]
    vols = [volume_record(profile, l) for l in lam_grid]
    out = {
        "lambda": lam_grid,
        "r": np.array([rec.r for rec in recs]),
        "area": np.array([rec.area for rec in recs]),
        "volume": np.array([v.volume for v in vols]),
        "diameter": np.array([rec.diameter_inner for rec in recs]),
        "grad_norm": np.array([rec.grad_norm for rec in recs]),
        "detII_int": np.array([rec.detII_integral for rec in recs]),
        "km_int": np.array([rec.km_integral for rec in recs]),
        "R": np.array([rec.R for rec in recs]),
        "R_times_lambda": np.array([rec.R * rec.lam for rec in recs]),
    }
    max_lam = profile.f_max
    dbl_lam, dbl_area, dbl_vol = [], [], []
    for rec, v in zip(recs, vols):
        if 2.0 * rec.lam <= max_lam:
            dbl_lam.append(rec.lam)
            dbl_area.append(record(profile, 2.0 * rec.lam).area / rec.area)
            dbl_vol.append(volume_record(profile, 2.0 * rec.lam).volume / v.volume)
    out["doubling_lambda"] = np.array(dbl_lam)
    out["area_doubling"] = np.array(dbl_area)
    out["volume_doubling"] = np.array(dbl_vol)
    return out


def diameter_drop_bound(profile: SolitonProfile, a: float,
                        b: float) -> Tuple[float, float, float]:
    """(D_b, lower_bound, beta_b) for the backward diameter estimate.

    The diameter of the level sphere can drop going inward from level a to
    level b by at most 2 beta_b (a - b), where beta_b is the largest
    distance from the level-b sphere back to the level-(b-1) sphere --
    radially, r(b) - r(b-1) by symmetry.
    """
    if not a >= b > 1.0:
        raise ValueError("need a >= b > 1")
    d_a = record(profile, a).diameter_inner
    d_b = record(profile, b).diameter_inner
    beta = profile.invert_potential(b) - profile.invert_potential(b - 1.0)
    lower = d_a - 2.0 * beta * (a - b)
    return d_b, lower, beta
