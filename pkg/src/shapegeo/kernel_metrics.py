"""RKHS kernels and the induced Riemannian metric on landmark configurations.

A configuration of N distinct points in R^d carries the block Gram
matrix K_q with blocks k(q_i, q_j) * I_d.  The induced metric is the
cometric G(h, h') = h^T K_q^{-1} h'; the minimal-norm vector field
inducing a tangent h is the kernel expansion with momenta p = K_q^{-1} h.
Gram solves use a Cholesky factorization with no regularization: a
degenerate configuration fails loudly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve

from .errors import DegenerateConfig
from .path_geodesics import MetricOracle

__all__ = [
    "Kernel",
    "gaussian_kernel",
    "sobolev_kernel",
    "sobolev_kernel_eval",
    "LandmarkConfig",
    "gram_assemble",
    "horizontal_lift",
    "induced_metric",
    "vertical_project",
    "landmark_metric_oracle",
    "admissibility_bound_check",
]

MIN_SEPARATION = 1e-8


@dataclass(frozen=True)
class Kernel:
    """Isotropic scalar kernel acting blockwise as k(x, y) * I_d."""

    kind: str
    scale: float = 1.0
    order: int = 1

    def __post_init__(self):
        if self.kind not in ("gaussian", "sobolev"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "sobolev" and self.order not in (1, 2):
            raise ValueError("sobolev kernel supports orders 1 and 2 only")
        if self.scale <= 0:
            raise ValueError("kernel scale must be positive")

    def __call__(self, x, y):
        """Evaluate k on points of shape (..., d); broadcasts."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.linalg.norm(x - y, axis=-1)
        return self.profile(r)

    def profile(self, r):
        """Kernel as a function of the distance r >= 0."""
        r = np.asarray(r, dtype=float) / self.scale
        if self.kind == "gaussian":
            return np.exp(-0.5 * r**2)
        if self.order == 1:
            return 0.5 * np.exp(-np.abs(r))
        return 0.25 * (1.0 + np.abs(r)) * np.exp(-np.abs(r))

    def at_zero(self):
        return float(self.profile(0.0))


def gaussian_kernel(sigma):
    return Kernel(kind="gaussian", scale=float(sigma))


def sobolev_kernel(order, scale=1.0):
    return Kernel(kind="sobolev", scale=float(scale), order=int(order))


def sobolev_kernel_eval(order, x, y):
    """Green's function of (Id - Laplacian)^order on the line, order 1 or 2."""
    return float(sobolev_kernel(order).profile(abs(float(x) - float(y))))


@dataclass(frozen=True)
class LandmarkConfig:
    """N pairwise-distinct points in R^d, stored as an (N, d) array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if not np.all(np.isfinite(pts)):
            raise ValueError("landmark positions must be finite")
        n = pts.shape[0]
        if n > 1:
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.linalg.norm(diff, axis=-1)
            np.fill_diagonal(dist, np.inf)
            if np.min(dist) <= MIN_SEPARATION:
                raise DegenerateConfig(
                    f"minimum landmark separation {np.min(dist):.3e} <= {MIN_SEPARATION:.0e}"
                )
        object.__setattr__(self, "points", pts)

    @property
    def n_points(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


def _scalar_gram(kernel, points_a, points_b=None):
    b = points_a if points_b is None else points_b
    return kernel(points_a[:, None, :], b[None, :, :])


def gram_assemble(kernel, config):
    """Block Gram matrix (N*d x N*d) with blocks k(q_i, q_j) * I_d."""
    scal = _scalar_gram(kernel, config.points)
    return np.kron(scal, np.eye(config.dim))


def _cho(kernel, config):
    gram = gram_assemble(kernel, config)
    try:
        return cho_factor(gram, lower=True), gram
    except np.linalg.LinAlgError as exc:
        raise DegenerateConfig(f"Gram matrix not positive definite: {exc}") from exc


def horizontal_lift(kernel, config, h):
    """Momenta p = K_q^{-1} h and the interpolating field X = sum k(., q_i) p_i."""
    h = np.asarray(h, dtype=float).reshape(config.n_points, config.dim)
    factor, _ = _cho(kernel, config)
    p = cho_solve(factor, h.reshape(-1)).reshape(config.n_points, config.dim)

    def field(x):
        x = np.asarray(x, dtype=float)
        weights = kernel(x[..., None, :], config.points)  # (..., N)
        return weights @ p

    return p, field


def induced_metric(kernel, config, h, h2=None):
    """Cometric value h^T K_q^{-1} h2 (h2 defaults to h)."""
    h = np.asarray(h, dtype=float).reshape(-1)
    h2 = h if h2 is None else np.asarray(h2, dtype=float).reshape(-1)
    factor, _ = _cho(kernel, config)
    return float(h @ cho_solve(factor, h2))


def rkhs_inner(kernel, points_a, momenta_a, points_b, momenta_b):
    """RKHS inner product of two finite kernel expansions."""
    momenta_a = np.asarray(momenta_a, dtype=float)
    momenta_b = np.asarray(momenta_b, dtype=float)
    cross = _scalar_gram(kernel, np.atleast_2d(points_a), np.atleast_2d(points_b))
    return float(np.einsum("ad,ab,bd->", momenta_a, cross, momenta_b))


def vertical_project(kernel, config, expansion_points, expansion_momenta):
    """Split a finite kernel expansion into horizontal and vertical parts.

    The horizontal part is the expansion over the configuration points
    that interpolates the field's values there; the remainder vanishes on
    the configuration and is RKHS-orthogonal to the horizontal part.

    Returns (p_horizontal, values_on_q, norms) where norms is the triple
    (|X|^2, |X_hor|^2, |X_ver|^2).
    """
    z = np.atleast_2d(np.asarray(expansion_points, dtype=float))
    mu = np.asarray(expansion_momenta, dtype=float)
    if mu.shape != z.shape:
        raise ValueError("momenta must match the expansion points in shape")
    values_on_q = _scalar_gram(kernel, config.points, z) @ mu  # (N, d)
    p, _ = horizontal_lift(kernel, config, values_on_q)
    norm_x = rkhs_inner(kernel, z, mu, z, mu)
    norm_hor = rkhs_inner(kernel, config.points, p, config.points, p)
    cross = rkhs_inner(kernel, config.points, p, z, mu)
    norm_ver = norm_x - 2.0 * cross + norm_hor
    return p, values_on_q, (norm_x, norm_hor, norm_ver)


def constrained_infimum(kernel, config, h, extra_points):
    """Independent realization of the induced metric as a constrained QP.

    Minimizes the RKHS norm of an expansion over config points plus
    extra_points subject to interpolating h on the configuration, via the
    KKT system.  Must agree with induced_metric.
    """
    h = np.asarray(h, dtype=float).reshape(config.n_points, config.dim)
    z = np.vstack([config.points, np.atleast_2d(np.asarray(extra_points, dtype=float))])
    kzz = _scalar_gram(kernel, z)  # (M, M)
    kqz = _scalar_gram(kernel, config.points, z)  # (N, M)
    m_pts, n_pts = kzz.shape[0], config.n_points
    # KKT: [Kzz  Kqz^T] [mu    ]   [0]
    #      [Kqz  0    ] [lambda] = [h]   (per component)
    kkt = np.zeros((m_pts + n_pts, m_pts + n_pts))
    kkt[:m_pts, :m_pts] = kzz
    kkt[:m_pts, m_pts:] = kqz.T
    kkt[m_pts:, :m_pts] = kqz
    rhs = np.zeros((m_pts + n_pts, config.dim))
    rhs[m_pts:] = h
    sol = solve(kkt, rhs)
    mu = sol[:m_pts]
    return float(np.einsum("ad,ab,bd->", mu, kzz, mu))


def landmark_metric_oracle(kernel, config_dim, n_points):
    """Metric oracle for flattened landmark configurations in R^(N*d).

    The metric is the kernel cometric h^T K(x)^{-1} k; its directional
    variation uses the analytic kernel gradient (Gaussian) or central
    finite differences of the Gram entries otherwise.
    """
    d = config_dim
    n = n_points
    m = n * d

    def _pts(x):
        return np.asarray(x, dtype=float).reshape(n, d)

    def _solve(x, vecs):
        gram = gram_assemble(kernel, LandmarkConfig(_pts(x)))
        try:
            factor = cho_factor(gram, lower=True)
        except np.linalg.LinAlgError as exc:
            raise DegenerateConfig(str(exc)) from exc
        return cho_solve(factor, vecs)

    def metric(x, h, k):
        x, h, k = np.broadcast_arrays(x, h, k)
        if x.ndim == 1:
            return float(h @ _solve(x, k))
        flat = x.reshape(-1, m)
        hf = h.reshape(-1, m)
        kf = k.reshape(-1, m)
        out = np.empty(flat.shape[0])
        for i in range(flat.shape[0]):
            out[i] = hf[i] @ _solve(flat[i], kf[i])
        return out.reshape(x.shape[:-1])

    def _dgram_dir(x, l):
        """Directional derivative of the scalar Gram in config direction l."""
        pts = _pts(x)
        lv = np.asarray(l, dtype=float).reshape(n, d)
        diff = pts[:, None, :] - pts[None, :, :]  # (N, N, d)
        r = np.linalg.norm(diff, axis=-1)
        ldiff = np.sum((lv[:, None, :] - lv[None, :, :]) * diff, axis=-1)
        if kernel.kind == "gaussian":
            return -kernel.profile(r) * ldiff / kernel.scale**2
        r_safe = np.where(r == 0.0, 1.0, r)
        dscal = _profile_derivative(kernel, r_safe) * ldiff / r_safe
        return np.where(r == 0.0, 0.0, dscal)

    def variation(x, l, h, k):
        x, l, h, k = np.broadcast_arrays(x, l, h, k)
        if x.ndim == 1:
            sols = _solve(x, np.stack([h, k], axis=1))
            p, p2 = sols[:, 0].reshape(n, d), sols[:, 1].reshape(n, d)
            dscal = _dgram_dir(x, l)
            return -float(np.einsum("ad,ab,bd->", p, dscal, p2))
        flat_shape = x.shape[:-1]
        xf = x.reshape(-1, m)
        lf = l.reshape(-1, m)
        hf = h.reshape(-1, m)
        kf = k.reshape(-1, m)
        out = np.empty(xf.shape[0])
        for i in range(xf.shape[0]):
            out[i] = variation(xf[i], lf[i], hf[i], kf[i])
        return out.reshape(flat_shape)

    def metric_rows(x, h):
        x, h = np.broadcast_arrays(x, h)
        if x.ndim == 1:
            return _solve(x, h)
        xf = x.reshape(-1, m)
        hf = h.reshape(-1, m)
        out = np.empty_like(hf)
        for i in range(xf.shape[0]):
            out[i] = _solve(xf[i], hf[i])
        return out.reshape(x.shape)

    def variation_rows(x, h, k):
        """Vector (DG(x, e_j, h, k))_j via the kernel gradient."""
        x, h, k = np.broadcast_arrays(x, h, k)
        if x.ndim == 1:
            sols = _solve(x, np.stack([h, k], axis=1))
            p, p2 = sols[:, 0].reshape(n, d), sols[:, 1].reshape(n, d)
            pts = _pts(x)
            diff = pts[:, None, :] - pts[None, :, :]
            r = np.linalg.norm(diff, axis=-1)
            pp = np.einsum("ad,bd->ab", p, p2)
            sym = pp + pp.T
            if kernel.kind == "gaussian":
                grad_scal = -kernel.profile(r)[..., None] * diff / kernel.scale**2
            else:
                np.fill_diagonal(r, 1.0)
                dprofile = _profile_derivative(kernel, r)
                np.fill_diagonal(dprofile, 0.0)
                grad_scal = dprofile[..., None] * diff / r[..., None]
            rows = -np.einsum("ab,abd->ad", sym, grad_scal)
            return rows.reshape(m)
        xf = x.reshape(-1, m)
        hf = h.reshape(-1, m)
        kf = k.reshape(-1, m)
        out = np.empty_like(xf)
        for i in range(xf.shape[0]):
            out[i] = variation_rows(xf[i], hf[i], kf[i])
        return out.reshape(x.shape)

    def gram(x):
        kq = gram_assemble(kernel, LandmarkConfig(_pts(x)))
        return np.linalg.inv(kq)

    return MetricOracle(
        dim=m,
        metric=metric,
        variation=variation,
        metric_rows=metric_rows,
        variation_rows=variation_rows,
        gram=gram,
        name=f"landmarks(N={n},d={d},{kernel.kind})",
    )


def _profile_derivative(kernel, r):
    """d/dr of the kernel profile, analytic for both supported kinds."""
    s = kernel.scale
    rs = r / s
    if kernel.kind == "gaussian":
        return -rs / s * np.exp(-0.5 * rs**2)
    if kernel.order == 1:
        return -0.5 / s * np.exp(-rs)
    return -0.25 / s * rs * np.exp(-rs)


def admissibility_bound_check(kernel, config, h):
    """Nondegeneracy bound: max_i |h_i| <= sqrt(k(0)) * sqrt(G(h, h))."""
    h_arr = np.asarray(h, dtype=float).reshape(config.n_points, config.dim)
    lhs = float(np.max(np.linalg.norm(h_arr, axis=1)))
    rhs = float(np.sqrt(kernel.at_zero()) * np.sqrt(induced_metric(kernel, config, h_arr)))
    return lhs, rhs
