"""Discretized immersed closed curves in R^d with the L^2 metric.

A curve is a PeriodicFunction with d >= 2 whose derivative never
vanishes on the grid.  The metric is

    G_c(h, k) = integral <h, k> |c'| dtheta,

its directional variation in direction l is

    D_{c,l}G(h, k) = integral <h, k> <l', c'> / |c'| dtheta,

both evaluated by the trapezoid rule with spectral derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotImmersed
from .periodic_core import PeriodicFunction, derivative, evaluate_spectral, transform

__all__ = [
    "IMMERSION_TOL",
    "Curve",
    "CurveTangent",
    "immersion_check",
    "l2_metric",
    "l2_metric_variation",
    "reparametrize",
    "reparametrize_tangent",
    "normal_chart",
]

# Absolute tolerance on the speed below which a curve is rejected.
IMMERSION_TOL = 1e-10


@dataclass(frozen=True)
class Curve:
    """Immersed closed curve; caches the nodal speed |c'(theta_j)|."""

    pos: PeriodicFunction
    speed: np.ndarray = field(init=False, repr=False)
    deriv: PeriodicFunction = field(init=False, repr=False)

    def __post_init__(self):
        if self.pos.dim < 2:
            raise ValueError("curves must have codomain dimension >= 2")
        d = derivative(self.pos, 1)
        speed = np.linalg.norm(d.values, axis=0)
        if np.min(speed) <= IMMERSION_TOL:
            raise NotImmersed(
                f"speed minimum {np.min(speed):.3e} <= {IMMERSION_TOL:.0e}"
            )
        object.__setattr__(self, "deriv", d)
        object.__setattr__(self, "speed", speed)

    @property
    def grid(self):
        return self.pos.grid

    @property
    def dim(self):
        return self.pos.dim

    @classmethod
    def from_callable(cls, func, n_samples, dim):
        return cls(PeriodicFunction.from_callable(func, n_samples, dim=dim))


@dataclass(frozen=True)
class CurveTangent:
    """Tangent vector at a curve: a function on the same grid and codomain."""

    base: Curve
    h: PeriodicFunction

    def __post_init__(self):
        if self.h.grid.n_samples != self.base.grid.n_samples:
            raise ValueError("tangent grid does not match base curve grid")
        if self.h.dim != self.base.dim:
            raise ValueError("tangent dimension does not match base curve")


def immersion_check(c):
    """Return the immersion margin min_j |c'(theta_j)|."""
    return float(np.min(c.speed))


def _check_same_base(*tangents):
    base = tangents[0].base
    for t in tangents[1:]:
        if t.base is not base and not np.array_equal(
            t.base.pos.values, base.pos.values
        ):
            raise ValueError("tangents are based at different curves")
    return base


def l2_metric(c, h, k):
    """Trapezoid quadrature of <h, k> |c'| dtheta."""
    _check_same_base(h, k)
    n = c.grid.n_samples
    integrand = np.sum(h.h.values * k.h.values, axis=0) * c.speed
    return float(2.0 * np.pi / n * np.sum(integrand))


def l2_metric_variation(c, l, h, k):
    """Directional derivative of the L^2 metric in curve direction l."""
    _check_same_base(l, h, k)
    n = c.grid.n_samples
    lprime = derivative(l.h, 1).values
    hk = np.sum(h.h.values * k.h.values, axis=0)
    lpcp = np.sum(lprime * c.deriv.values, axis=0)
    return float(2.0 * np.pi / n * np.sum(hk * lpcp / c.speed))


def reparametrize(c, phi):
    """Compose c with a circle diffeomorphism via trigonometric interpolation."""
    angles = phi.values
    vals = evaluate_spectral(transform(c.pos), angles)
    return Curve(PeriodicFunction(c.grid, vals))


def reparametrize_tangent(h, phi):
    """Compose a tangent field with a circle diffeomorphism."""
    angles = phi.values
    vals = evaluate_spectral(transform(h.h), angles)
    base = reparametrize(h.base, phi)
    return CurveTangent(base, PeriodicFunction(h.h.grid, vals))


def normal_chart(q, a):
    """Return q + a * n_q for a planar curve q and scalar field a.

    n_q is the unit normal obtained by rotating the unit tangent by -pi/2,
    which points outward for counterclockwise curves: the unit circle with
    constant a = rho maps to the circle of radius 1 + rho.
    """
    if q.dim != 2:
        raise ValueError("normal_chart requires planar curves (d = 2)")
    if a.dim != 1 or a.grid.n_samples != q.grid.n_samples:
        raise ValueError("chart field must be scalar on the curve's grid")
    tangent = q.deriv.values / q.speed
    normal = np.stack([tangent[1], -tangent[0]])
    vals = q.pos.values + a.values[0] * normal
    return Curve(PeriodicFunction(q.grid, vals))
