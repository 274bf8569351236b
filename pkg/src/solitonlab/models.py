"""Closed-form model geometries and their potential-theoretic checks.

Four explicit models cover the limits that arise in the analysis:

* ``Cigar`` -- the 2-d steady soliton d sigma^2 + (1/a^2) tanh^2(a sigma)
  d theta^2 with potential 2 ln cosh(a sigma); curvature decays like
  exp(-2 a sigma) and the surface is asymptotic to a cylinder of radius 1/a.
* ``CigarLine`` -- flat line times a cigar, with the affine-plus-cigar
  potential family c1 + c2 s + 2 ln cosh(a sigma).
* ``RoundCylinder`` -- flat line times a round 2-sphere of radius a; scalar
  curvature identically 2/a^2, and its sphere slices shrink to extinction
  under the curvature flow in finite time a0^2/2.
* ``BryantNumeric`` -- wrapper over the numerically integrated 3-d profile.

The sigma coordinate is the arc-length radial coordinate of the cigar
(sigma = arcsinh rho in the conformal chart), which makes distances and
gradient norms trivial; docs/derivations.md records the chart change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bryant import SolitonProfile
from .warped import (
    ProductMetric,
    ProductPotential,
    RadialPotential,
    WarpedMetric,
    curvature_at,
    soliton_residual,
)

__all__ = [
    "Cigar",
    "CigarLine",
    "RoundCylinder",
    "BryantNumeric",
    "SliceEvolution",
    "AffinePerturbationError",
    "make_model",
    "potential_family_residual",
    "potential_rigidity_probe",
    "cylinder_slice_evolution",
]

#: default half-width of the (s, sigma) test grids used by the potential
#: family and rigidity checks
GRID_EXTENT = 5.0


class AffinePerturbationError(ValueError):
    """Perturbation is affine in s, i.e. already inside the exact family."""


@dataclass(frozen=True)
class Cigar:
    """2-d cigar surface at scale a: metric d sigma^2 + (1/a^2)tanh^2(a sigma) d theta^2."""

    scale: float = 1.0
    domain_max: float = 1e6

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def metric(self) -> WarpedMetric:
        a = self.scale
        return WarpedMetric(
            dim=2,
            w=lambda s: math.tanh(a * s) / a,
            wp=lambda s: 1.0 / math.cosh(a * s) ** 2,
            wpp=lambda s: -2.0 * a * math.tanh(a * s) / math.cosh(a * s) ** 2,
            domain_max=self.domain_max,
        )

    def potential(self) -> RadialPotential:
        a = self.scale
        return RadialPotential(
            f=lambda s: 2.0 * math.log(math.cosh(a * s)),
            fp=lambda s: 2.0 * a * math.tanh(a * s),
            fpp=lambda s: 2.0 * a * a / math.cosh(a * s) ** 2,
        )

    def scalar_curvature(self, sigma):
        a = self.scale
        return 4.0 * a * a / np.cosh(a * np.asarray(sigma, dtype=float)) ** 2


@dataclass(frozen=True)
class CigarLine:
    """Flat line times a cigar, potential family c1 + c2 s + 2 ln cosh(a sigma)."""

    scale: float
    slope: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @classmethod
    def from_limit_curvature(cls, rhat: float) -> "CigarLine":
        """Model whose core curvature is rhat and conserved quantity is 1.

        The cigar factor carries scalar curvature rhat at its pole
        (scale a = sqrt(rhat)/2) and the line slope sqrt(1 - rhat) tops the
        gradient norm up so that R + |grad f|^2 = 1 everywhere.
        """
        if not 0.0 < rhat < 1.0:
            raise ValueError("limit curvature must lie in (0, 1)")
        return cls(scale=math.sqrt(rhat) / 2.0, slope=math.sqrt(1.0 - rhat))

    @property
    def limit_curvature(self) -> float:
        return 4.0 * self.scale**2

    def fiber(self) -> Cigar:
        return Cigar(scale=self.scale)

    def metric(self) -> ProductMetric:
        return ProductMetric(fiber=self.fiber().metric())

    def potential(self, c2: float | None = None) -> ProductPotential:
        slope = self.slope if c2 is None else c2
        return ProductPotential(slope=slope, fiber=self.fiber().potential())


@dataclass(frozen=True)
class RoundCylinder:
    """Flat line times a round 2-sphere of radius a; R identically 2/a^2."""

    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def metric(self) -> ProductMetric:
        a = self.radius
        return ProductMetric(fiber=WarpedMetric(
            dim=2,
            w=lambda s: a * math.sin(s / a),
            wp=lambda s: math.cos(s / a),
            wpp=lambda s: -math.sin(s / a) / a,
            domain_max=math.pi * a,
        ))

    def potential(self) -> ProductPotential:
        zero = RadialPotential(f=lambda s: 0.0, fp=lambda s: 0.0,
                               fpp=lambda s: 0.0)
        return ProductPotential(slope=0.0, fiber=zero)

    @property
    def scalar_curvature(self) -> float:
        return 2.0 / self.radius**2


@dataclass(frozen=True)
class BryantNumeric:
    """Numerically integrated 3-d rotationally symmetric steady soliton."""

    profile: SolitonProfile

    def metric(self) -> WarpedMetric:
        return self.profile.metric()

    def potential(self) -> RadialPotential:
        return self.profile.potential()


def make_model(params: dict):
    """Build a model from a JSON-style parameter dict.

    Recognized forms::

        {"model": "cigar", "scale": 1.0}
        {"model": "cigar-line", "scale": 0.3, "slope": 0.8}
        {"model": "cigar-line", "rhat": 0.5}
        {"model": "round-cylinder", "radius": 1.4}
    """
    kind = params.get("model")
    if kind == "cigar":
        return Cigar(scale=float(params.get("scale", 1.0)))
    if kind == "cigar-line":
        if "rhat" in params:
            return CigarLine.from_limit_curvature(float(params["rhat"]))
        return CigarLine(scale=float(params["scale"]),
                         slope=float(params["slope"]))
    if kind == "round-cylinder":
        return RoundCylinder(radius=float(params["radius"]))
    raise ValueError(f"unknown model parameters {params!r}")


# ---------------------------------------------------------------------------
# potential family and rigidity
# ---------------------------------------------------------------------------

def _grids(n: int, extent: float):
    s = np.linspace(-extent, extent, n)
    sigma = np.linspace(1e-2, extent, n)
    return s, sigma


def potential_family_residual(model: CigarLine, c1: float, c2: float,
                              n: int = 50, extent: float = GRID_EXTENT) -> float:
    """Sup over an (s, sigma) grid of the soliton residual of c1 + c2 s + fbar.

    The s-linear part has zero Hessian against the flat factor's zero Ricci,
    so the residual is the fiber residual regardless of (c1, c2); the sup is
    still evaluated honestly on the full grid.
    """
    metric = model.metric()
    pot = model.potential(c2=c2)
    _, sigmas = _grids(n, extent)
    worst = 0.0
    for s in np.linspace(-extent, extent, n):
        for sigma in sigmas:
            res = soliton_residual(metric, pot, (s, sigma))
            worst = max(worst, abs(res[0]), abs(res[1]))
    return worst


def _hessian_components(fn: Callable[[float, float], float],
                        model: CigarLine, s: float, sigma: float,
                        h: float = 1e-4):
    """FD Hessian of fn(s, sigma) split into the product-frame components.

    Returns (f_ss, f_s_sigma, f_sigma_sigma, theta_component) where the theta
    component of the Hessian of a theta-independent function on the product
    is (w'/w) * f_sigma.
    """
    f_ss = (fn(s + h, sigma) - 2.0 * fn(s, sigma) + fn(s - h, sigma)) / h**2
    f_gg = (fn(s, sigma + h) - 2.0 * fn(s, sigma) + fn(s, sigma - h)) / h**2
    f_sg = (fn(s + h, sigma + h) - fn(s + h, sigma - h)
            - fn(s - h, sigma + h) + fn(s - h, sigma - h)) / (4.0 * h * h)
    f_g = (fn(s, sigma + h) - fn(s, sigma - h)) / (2.0 * h)
    fib = model.fiber().metric()
    theta = fib.wp(sigma) / fib.w(sigma) * f_g
    return f_ss, f_sg, f_gg, theta


def potential_rigidity_probe(model: CigarLine,
                             perturbation: Callable[[float, float], float],
                             amplitude: float,
                             n: int = 25, extent: float = GRID_EXTENT) -> float:
    """Sup soliton residual of canonical potential + amplitude * perturbation.

    Perturbations affine in s are rejected: they stay inside the exact
    family, so probing them would measure nothing.  The residual of the
    soliton equation Hess f = Ric is linear in the perturbation, so it is
    first-order in the amplitude for any genuinely non-affine direction.
    """
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    s_grid, sigma_grid = _grids(n, extent)

    # reject perturbations of the form c1 + c2 s (sampled least-squares fit)
    ss, gg = np.meshgrid(s_grid, sigma_grid, indexing="ij")
    vals = np.array([[perturbation(s, g) for g in sigma_grid] for s in s_grid])
    design = np.stack([np.ones_like(ss.ravel()), ss.ravel()], axis=1)
    coef, *_ = np.linalg.lstsq(design, vals.ravel(), rcond=None)
    dev = np.max(np.abs(vals.ravel() - design @ coef))
    if dev <= 1e-10 * max(1.0, np.max(np.abs(vals))):
        raise AffinePerturbationError(
            "perturbation is affine in s on the test grid; it lies inside "
            "the exact potential family")

    metric = model.metric()
    base = model.potential()
    worst = 0.0
    for s in s_grid:
        for sigma in sigma_grid:
            # canonical part in closed form (zero up to roundoff) ...
            res0 = soliton_residual(metric, base, (s, sigma))
            # ... plus amplitude times the FD Hessian of the perturbation
            # (the Ricci term is already balanced by the canonical part)
            h_ss, h_sg, h_gg, h_th = _hessian_components(
                perturbation, model, s, sigma)
            comps = (res0[0] + amplitude * h_gg,
                     res0[1] + amplitude * h_th,
                     amplitude * h_ss,
                     amplitude * h_sg)
            worst = max(worst, *(abs(c) for c in comps))
    return worst


# ---------------------------------------------------------------------------
# shrinking cylinder slices
# ---------------------------------------------------------------------------

@dataclass
class SliceEvolution:
    """Sphere-slice areas of the round cylinder under the curvature flow.

    The sphere factor evolves by a(tau)^2 = a0^2 - 2 tau, so the slice area
    4 pi a(tau)^2 decreases linearly and vanishes at tau = a0^2 / 2 exactly.
    """

    radius0: float
    tau: np.ndarray
    area: np.ndarray
    extinction_time: float
    #: worst violation of dA/dtau <= -(1/2) * integral of R over the slice
    flux_slack: float = field(default=0.0)

    def __post_init__(self):
        if np.any(np.diff(self.area) >= 0):
            raise ValueError("slice area must be strictly decreasing")
        if not math.isfinite(self.extinction_time):
            raise ValueError("extinction time must be finite")


def cylinder_slice_evolution(radius0: float, tau_max: float | None = None,
                             n: int = 201) -> SliceEvolution:
    """Evolve round-cylinder sphere slices; exact shrinking-sphere solution.

    ``tau_max`` beyond extinction is clipped to just before the extinction
    time (the slice ceases to exist there; no negative areas are produced),
    and the inequality dA/dtau <= -(1/2) * integral of R is checked at every
    retained step.  dA/dtau = -8 pi exactly, while the right-hand side is
    -(1/2) (2/a^2)(4 pi a^2) = -4 pi, so the slack is 4 pi at every step.
    """
    if radius0 <= 0:
        raise ValueError("radius must be positive")
    extinction = radius0**2 / 2.0
    if tau_max is None or tau_max >= extinction:
        tau_max = extinction * (1.0 - 1e-9)
    tau = np.linspace(0.0, tau_max, n)
    a_sq = radius0**2 - 2.0 * tau
    area = 4.0 * math.pi * a_sq
    # dA/dtau = -8 pi; -(1/2) int R da = -(1/2)(2/a^2)(4 pi a^2) = -4 pi
    rhs = -0.5 * (2.0 / a_sq) * area
    slack = float(np.max(-8.0 * math.pi - rhs))  # must be <= 0
    return SliceEvolution(radius0=radius0, tau=tau, area=area,
                          extinction_time=extinction, flux_slack=slack)
