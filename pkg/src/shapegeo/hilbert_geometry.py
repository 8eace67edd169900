"""Finite truncations of the Hilbert sphere and the ellipsoid non-attainment.

The sphere is represented extrinsically in R^m.  The metric oracle used
by the geodesic solvers is the product metric dr^2 + g_{S^{m-1}} in polar
form, for which the unit sphere is totally geodesic and sphere distances
equal arccos of the inner product.

The ellipsoid is the image of the sphere under the diagonal scaling with
semi-axes a_0 = 1, a_n = 1 + 2^{-n}; half great circles through e_0 and
-e_0 in the (e_0, e_n)-plane have lengths squeezed between pi and
(1 + 2^{-n}) * pi with no path attaining pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import OutOfChart
from .path_geodesics import MetricOracle

__all__ = [
    "EllipsoidSpec",
    "sphere_chart",
    "sphere_chart_inverse",
    "sphere_distance_analytic",
    "sphere_oracle",
    "ellipsoid_map",
    "ellipsoid_map_inverse",
    "ellipsoid_path_length",
    "half_great_circle",
    "grossman_experiment",
]


@dataclass(frozen=True)
class EllipsoidSpec:
    """Semi-axes a_0 = 1, a_n = 1 + 2^{-n} for 1 <= n < m."""

    m: int = 24

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("ambient dimension must be >= 2")

    @property
    def semi_axes(self):
        n = np.arange(self.m)
        a = 1.0 + 2.0 ** (-n.astype(float))
        a[0] = 1.0
        return a


def _check_unit(x, tol=1e-10):
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > tol:
        raise ValueError("point is not on the unit sphere")
    return x


def sphere_chart(x0, x):
    """Chart u_{x0}(x) = x - <x, x0> x0 on the half-sphere <x, x0> > 0."""
    x0 = _check_unit(x0)
    x = _check_unit(x)
    inner = float(np.dot(x, x0))
    if inner <= 0:
        raise OutOfChart(f"<x, x0> = {inner:.3e} <= 0")
    return x - inner * x0


def sphere_chart_inverse(x0, y):
    """Inverse chart y -> y + sqrt(1 - |y|^2) x0."""
    x0 = _check_unit(x0)
    y = np.asarray(y, dtype=float)
    if abs(float(np.dot(y, x0))) > 1e-10:
        raise ValueError("chart image must be orthogonal to the center")
    norm2 = float(np.dot(y, y))
    if norm2 >= 1.0:
        raise OutOfChart(f"|y| = {np.sqrt(norm2):.6f} >= 1")
    return y + np.sqrt(1.0 - norm2) * x0


def sphere_distance_analytic(x, y):
    """Great-circle distance arccos <x, y> for unit vectors."""
    x = _check_unit(x)
    y = _check_unit(y)
    return float(np.arccos(np.clip(np.dot(x, y), -1.0, 1.0)))


def sphere_oracle(m):
    """Oracle for the polar product metric dr^2 + g_{S^{m-1}} on R^m \\ {0}.

    G_x(h, k) = <h, k>/r^2 + <h, x><k, x> (r^2 - 1)/r^4, r = |x|.  On the
    unit sphere this restricts to the ambient inner product and great
    circles at r = 1 are geodesics.
    """

    def metric(x, h, k):
        x, h, k = np.broadcast_arrays(x, h, k)
        r2 = np.sum(x * x, axis=-1)
        hk = np.sum(h * k, axis=-1)
        hx = np.sum(h * x, axis=-1)
        kx = np.sum(k * x, axis=-1)
        return hk / r2 + hx * kx * (r2 - 1.0) / r2**2

    def variation(x, l, h, k):
        x, l, h, k = np.broadcast_arrays(x, l, h, k)
        r2 = np.sum(x * x, axis=-1)
        xl = np.sum(x * l, axis=-1)
        hk = np.sum(h * k, axis=-1)
        hx = np.sum(h * x, axis=-1)
        kx = np.sum(k * x, axis=-1)
        hl = np.sum(h * l, axis=-1)
        kl = np.sum(k * l, axis=-1)
        t = 1.0 / r2 - 1.0 / r2**2
        ds = -2.0 * xl / r2**2
        dt = -2.0 * xl / r2**2 + 4.0 * xl / r2**3
        return hk * ds + (hl * kx + hx * kl) * t + hx * kx * dt

    def metric_rows(x, h):
        x, h = np.broadcast_arrays(x, h)
        r2 = np.sum(x * x, axis=-1)[..., None]
        hx = np.sum(h * x, axis=-1)[..., None]
        return h / r2 + hx * x * (r2 - 1.0) / r2**2

    def variation_rows(x, h, k):
        x, h, k = np.broadcast_arrays(x, h, k)
        r2 = np.sum(x * x, axis=-1)[..., None]
        hk = np.sum(h * k, axis=-1)[..., None]
        hx = np.sum(h * x, axis=-1)[..., None]
        kx = np.sum(k * x, axis=-1)[..., None]
        t = 1.0 / r2 - 1.0 / r2**2
        # gradients in l of ds, dt terms: ds = -2<x,l>/r^4 etc.
        rows = hk * (-2.0 / r2**2) * x
        rows = rows + t * (kx * h + hx * k)
        rows = rows + hx * kx * (-2.0 / r2**2 + 4.0 / r2**3) * x
        return rows

    def gram(x):
        x = np.asarray(x, dtype=float)
        r2 = float(np.dot(x, x))
        return np.eye(m) / r2 + np.outer(x, x) * (r2 - 1.0) / r2**2

    return MetricOracle(
        dim=m,
        metric=metric,
        variation=variation,
        metric_rows=metric_rows,
        variation_rows=variation_rows,
        gram=gram,
        name=f"sphere(m={m})",
    )


def ellipsoid_map(spec, x):
    """Coordinatewise scaling x_n -> a_n x_n."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.m:
        raise ValueError("dimension mismatch with the ellipsoid spec")
    return spec.semi_axes * x


def ellipsoid_map_inverse(spec, y):
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != spec.m:
        raise ValueError("dimension mismatch with the ellipsoid spec")
    return y / spec.semi_axes


def ellipsoid_path_length(spec, path):
    """Length of F(c) for a discrete path c on the unit sphere.

    Path samples are renormalized onto the sphere; the velocity is a
    second-order central difference and the integrand sqrt(sum a_n^2
    cdot_n^2) is integrated with the composite trapezoid rule.
    """
    pts = np.asarray(path.points, dtype=float)
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    n_steps = pts.shape[0] - 1
    dt = 1.0 / n_steps
    vel = np.gradient(pts, dt, axis=0, edge_order=2)
    integrand = np.sqrt(np.sum((spec.semi_axes * vel) ** 2, axis=1))
    return float(np.trapezoid(integrand, dx=dt))


def half_great_circle(n, n_steps, m):
    """Discrete half great circle from e_0 to -e_0 through the (e_0, e_n)-plane."""
    if not 1 <= n < m:
        raise ValueError("plane index out of range")
    t = np.linspace(0.0, 1.0, n_steps + 1)
    pts = np.zeros((n_steps + 1, m))
    pts[:, 0] = np.cos(np.pi * t)
    pts[:, n] = np.sin(np.pi * t)
    return pts


def grossman_experiment(spec, n_list, quad_tol=1e-12):
    """Lengths of the half-great-circle family F(c_n), via adaptive quadrature.

    Each row is (n, length, (1 + 2^{-n}) * pi).  The lengths strictly
    decrease in n, stay above pi, and respect the displayed bound.
    """
    a = spec.semi_axes
    rows = []
    for n in n_list:
        if not 1 <= n < spec.m:
            raise ValueError(f"plane index {n} outside ambient dimension {spec.m}")
        an = a[n]

        def integrand(t, an=an):
            return np.pi * np.sqrt(np.sin(np.pi * t) ** 2 + an**2 * np.cos(np.pi * t) ** 2)

        length, _ = quad(integrand, 0.0, 1.0, epsabs=quad_tol, epsrel=quad_tol, limit=200)
        rows.append((int(n), float(length), float((1.0 + 2.0 ** (-n)) * np.pi)))
    return rows
