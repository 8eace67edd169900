"""Diffeomorphisms of the circle and the line, and their flows.

Circle maps are stored as lifts phi(x) = x + f(x) with periodic
displacement f and 1 + f' > 0; the displacement is wrapped by a multiple
of 2*pi so its mean lies in [-pi, pi).  Flows integrate per node with
RK4 (fixed base step 1/256, Richardson-checked).  Flows on the real line
run on a finite window; a trajectory leaving the window is reported as
blow-up data, not as an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import StepCollapse, VanishingField
from .periodic_core import (
    PeriodicFunction,
    PeriodicGrid,
    SpectralCoeffs,
    compress,
    derivative,
    evaluate_spectral,
    inverse_transform,
    transform,
)

__all__ = [
    "CircleDiffeo",
    "CircleField",
    "RealGrid",
    "TimeDependentField",
    "FlowResult",
    "flow_autonomous",
    "flow_time_dependent",
    "conjugate_to_rotation",
    "exp_noninjectivity_demo",
    "nonsurjectivity_candidate",
    "isolated_periodic_points",
    "falsification_search",
    "membership_check",
    "compose",
    "invert",
]

TWO_PI = 2.0 * np.pi


def _wrap_mean(values):
    """Shift by a multiple of 2*pi so the mean displacement is in [-pi, pi)."""
    shift = TWO_PI * np.floor((np.mean(values) + np.pi) / TWO_PI)
    return values - shift


@dataclass(frozen=True)
class CircleDiffeo:
    """Orientation-preserving circle map via its lift displacement."""

    disp: PeriodicFunction

    def __post_init__(self):
        if self.disp.dim != 1:
            raise ValueError("displacement must be scalar-valued")
        wrapped = PeriodicFunction(self.disp.grid, _wrap_mean(self.disp.values))
        dprime = derivative(wrapped, 1).values[0]
        if np.min(1.0 + dprime) <= 0.0:
            raise StepCollapse(
                f"orientation check failed: min(1 + f') = {np.min(1.0 + dprime):.3e}"
            )
        object.__setattr__(self, "disp", wrapped)

    @property
    def grid(self):
        return self.disp.grid

    @property
    def values(self):
        """Lift values phi(theta_j) = theta_j + f(theta_j)."""
        return self.grid.nodes + self.disp.values[0]

    @classmethod
    def identity(cls, n_samples):
        grid = PeriodicGrid(n_samples)
        return cls(PeriodicFunction(grid, np.zeros((1, n_samples))))

    @classmethod
    def rotation(cls, alpha, n_samples):
        grid = PeriodicGrid(n_samples)
        return cls(PeriodicFunction(grid, np.full((1, n_samples), float(alpha))))

    def __call__(self, x):
        """Evaluate the lift at arbitrary points."""
        x = np.asarray(x, dtype=float)
        return x + evaluate_spectral(compress(transform(self.disp)), x)[0]


@dataclass(frozen=True)
class CircleField:
    """Vector field on the circle (radians per unit time)."""

    u: PeriodicFunction

    def __post_init__(self):
        if self.u.dim != 1:
            raise ValueError("circle fields are scalar-valued")

    @property
    def grid(self):
        return self.u.grid

    @classmethod
    def from_callable(cls, func, n_samples):
        return cls(PeriodicFunction.from_callable(func, n_samples, dim=1))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return evaluate_spectral(compress(transform(self.u)), x)[0]


def compose(phi, psi):
    """Composition phi o psi of circle diffeomorphisms."""
    if phi.grid.n_samples != psi.grid.n_samples:
        raise ValueError("grids do not match")
    f_at_psi = evaluate_spectral(compress(transform(phi.disp)), psi.values)[0]
    disp = psi.disp.values[0] + f_at_psi
    return CircleDiffeo(PeriodicFunction(psi.grid, disp[None, :]))


def invert(phi, tol=1e-12, max_iter=80):
    """Inverse circle diffeomorphism via monotone bisection per node.

    Solves y + f(y) = theta_j on the lift; the bracket comes from the
    displacement range.
    """
    nodes = phi.grid.nodes
    f = phi.disp.values[0]
    coeffs = compress(transform(phi.disp))
    lo = nodes - np.max(f) - 1e-9
    hi = nodes - np.min(f) + 1e-9
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = mid + evaluate_spectral(coeffs, mid)[0] - nodes
        hi = np.where(val > 0.0, mid, hi)
        lo = np.where(val > 0.0, lo, mid)
        if np.max(hi - lo) < tol:
            break
    y = 0.5 * (lo + hi)
    return CircleDiffeo(PeriodicFunction(phi.grid, (y - nodes)[None, :]))


# ---------------------------------------------------------------------------
# Flows
# ---------------------------------------------------------------------------


def _rk4_step(f, x, dt):
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_autonomous(evaluate, x, t, base_step=1.0 / 256.0, tol=1e-8, max_halvings=8):
    """Fixed-step RK4 with a Richardson accuracy check on the whole run."""
    n_steps = max(1, int(np.ceil(abs(t) / base_step)))
    for _ in range(max_halvings + 1):
        dt = t / n_steps
        coarse = x.copy()
        for _ in range(n_steps):
            coarse = _rk4_step(evaluate, coarse, dt)
        fine = x.copy()
        for _ in range(2 * n_steps):
            fine = _rk4_step(evaluate, fine, 0.5 * dt)
        if np.max(np.abs(fine - coarse)) <= tol:
            return fine
        n_steps *= 2
    return fine


def flow_autonomous(u, t):
    """Time-t flow of an autonomous circle field (the exponential map at t)."""
    coeffs = compress(transform(u.u))

    def evaluate(x):
        return evaluate_spectral(coeffs, x)[0]

    nodes = u.grid.nodes
    end = _integrate_autonomous(evaluate, nodes, float(t))
    disp = end - nodes
    return CircleDiffeo(PeriodicFunction(u.grid, disp[None, :]))


@dataclass(frozen=True)
class RealGrid:
    """Uniform working window [-half_width, half_width] on the line."""

    half_width: float = 10.0
    n_nodes: int = 2048

    @property
    def nodes(self):
        return np.linspace(-self.half_width, self.half_width, self.n_nodes)


@dataclass(frozen=True)
class TimeDependentField:
    """Piecewise-constant-in-time field: knots t_0 < ... < t_K and one
    field per interval [t_i, t_{i+1})."""

    knots: np.ndarray
    fields: Sequence
    grid: object  # RealGrid or PeriodicGrid

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if len(self.fields) != len(knots) - 1:
            raise ValueError("need one field per knot interval")
        object.__setattr__(self, "knots", knots)

    @classmethod
    def uniform(cls, fields, grid, t_start=0.0, t_end=1.0):
        knots = np.linspace(t_start, t_end, len(fields) + 1)
        return cls(knots, list(fields), grid)

    def reversed(self):
        """The time-reversed field t -> -u(t_end - t) on the same knots."""
        t0, t1 = self.knots[0], self.knots[-1]
        knots = t0 + t1 - self.knots[::-1]
        fields = [_negate_field(f) for f in self.fields[::-1]]
        return TimeDependentField(knots, fields, self.grid)


def _negate_field(f):
    if isinstance(f, PeriodicFunction):
        return PeriodicFunction(f.grid, -f.values)
    return -np.asarray(f, dtype=float)


def _field_evaluator(field, grid):
    if isinstance(grid, PeriodicGrid):
        coeffs = compress(transform(field))
        return lambda x: evaluate_spectral(coeffs, x)[0]
    spline = CubicSpline(grid.nodes, np.asarray(field, dtype=float))
    return spline


@dataclass
class FlowResult:
    """Final map samples, or blow-up data when a trajectory escapes."""

    final_map: Optional[np.ndarray]
    blow_up: bool = False
    blow_up_time: Optional[float] = None


MAX_SUBSTEPS = 2**20


def flow_time_dependent(u, grid=None, x0=None, base_step=1.0 / 256.0, tol=1e-8):
    """Integrate the non-autonomous flow d/dt phi = u(t) o phi.

    On real-line grids a trajectory leaving the working window marks the
    result as blown up and the window-exit time is refined by bisection.
    """
    grid = grid if grid is not None else u.grid
    periodic = isinstance(grid, PeriodicGrid)
    x = np.array(grid.nodes if x0 is None else np.atleast_1d(x0), dtype=float)
    window = None if periodic else grid.half_width

    t = float(u.knots[0])
    n_sub = 0
    for i, t_next in enumerate(u.knots[1:]):
        evaluate = _field_evaluator(u.fields[i], grid)
        while t < t_next - 1e-14:
            speed = np.max(np.abs(evaluate(x))) + 1e-30
            scale = np.max(np.abs(x)) + 1.0
            dt = min(t_next - t, base_step, 0.05 * scale / speed)
            while True:
                x_new = _rk4_step(evaluate, x, dt)
                half = _rk4_step(evaluate, _rk4_step(evaluate, x, 0.5 * dt), 0.5 * dt)
                if np.max(np.abs(half - x_new)) <= tol * scale or dt <= 1e-12:
                    break
                dt *= 0.5
            x = half
            t += dt
            n_sub += 1
            if window is not None and np.max(np.abs(x)) > window:
                idx = int(np.argmax(np.abs(x)))
                t_exit = _refine_exit_time(evaluate, x, idx, t, dt, window)
                return FlowResult(final_map=None, blow_up=True, blow_up_time=t_exit)
            if n_sub > MAX_SUBSTEPS:
                return FlowResult(final_map=None, blow_up=True, blow_up_time=t)
    return FlowResult(final_map=x, blow_up=False)


def _refine_exit_time(evaluate, x_after, idx, t_after, dt, window):
    """Bisect within the last accepted step for the window-crossing time."""
    # re-integrate the single escaping trajectory backwards to the step start
    x_end = x_after[idx]
    x_start = _rk4_step(evaluate, np.array([x_end]), -dt)[0]
    lo, hi = 0.0, dt
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        x_mid = _rk4_step(evaluate, np.array([x_start]), mid)[0]
        if abs(x_mid) > window:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-9 * max(dt, 1.0):
            break
    return t_after - dt + 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Exponential-map constructions on Diff(S^1)
# ---------------------------------------------------------------------------

VANISHING_TOL = 1e-8


def conjugate_to_rotation(u):
    """Conjugating diffeomorphism eta and rotation speed c for a nowhere
    vanishing field: eta(x) = c * int_0^x dy/u(y), c = 2*pi / int dx/u.

    Guarantee: eta o flow_t(u) o eta^{-1} is the rotation by c*t.
    """
    vals = u.u.values[0]
    if np.min(np.abs(vals)) <= VANISHING_TOL:
        raise VanishingField(
            f"min |u| = {np.min(np.abs(vals)):.3e} <= {VANISHING_TOL:.0e}"
        )
    g = 1.0 / vals
    mean = float(np.mean(g))
    c = 1.0 / mean
    # periodic antiderivative of (g - mean) via division by ik
    grid = u.grid
    n = grid.n_samples
    coeffs = np.fft.fft(g) / n
    k = grid.wavenumbers.astype(float)
    anti = np.zeros_like(coeffs)
    nonzero = k != 0
    anti[nonzero] = coeffs[nonzero] / (1j * k[nonzero])
    anti[n // 2] = 0.0
    osc = inverse_transform(SpectralCoeffs(grid, anti[None, :])).values[0]
    eta_disp = c * (osc - osc[0])  # eta(x) - x, with eta(0) = 0
    eta = CircleDiffeo(PeriodicFunction(grid, eta_disp[None, :]))
    return eta, c


def exp_noninjectivity_demo(psi, n):
    """Field u(x) = (2*pi/n) psi'(psi^{-1}(x)) whose time-1 flow is the
    rotation by 2*pi/n for every 2*pi/n-periodic psi.

    Returns (u, err) with err the sup-distance between the computed flow
    and the rotation.
    """
    grid = psi.grid
    nodes = grid.nodes
    shift = TWO_PI / n
    # periodicity defect of psi: psi(x + 2*pi/n) - psi(x) - 2*pi/n
    disp_coeffs = compress(transform(psi.disp))
    defect = np.max(
        np.abs(
            evaluate_spectral(disp_coeffs, nodes + shift)[0] - psi.disp.values[0]
        )
    )
    if defect > 1e-8:
        raise ValueError(f"psi is not 2*pi/{n}-periodic (defect {defect:.3e})")
    psi_inv = invert(psi)
    dpsi = derivative(psi.disp, 1)
    dpsi_coeffs = compress(transform(dpsi))
    inv_nodes = psi_inv.values
    u_vals = shift * (1.0 + evaluate_spectral(dpsi_coeffs, inv_nodes)[0])
    u = CircleField(PeriodicFunction(grid, u_vals[None, :]))
    phi = flow_autonomous(u, 1.0)
    err = float(np.max(np.abs(_wrap_angle(phi.values - nodes - shift))))
    return u, err


def _wrap_angle(x):
    return (np.asarray(x) + np.pi) % TWO_PI - np.pi


def nonsurjectivity_candidate(n, eps, n_samples=256):
    """The map phi(x) = x + 2*pi/n + eps*sin(n x): fixed-point free with
    isolated periodic points, hence not a time-1 flow of any field.

    Requires |eps| < 2/n and, for phi to be a diffeomorphism on the grid,
    |eps| * n < 1.
    """
    if abs(eps) >= 2.0 / n:
        raise ValueError(f"|eps| must be < 2/n = {2.0 / n:.4f}")
    grid = PeriodicGrid(n_samples)
    disp = TWO_PI / n + eps * np.sin(n * grid.nodes)
    phi = CircleDiffeo(PeriodicFunction(grid, disp[None, :]))
    if np.min(disp) <= 0.0 or np.max(disp) >= TWO_PI:
        raise ValueError("candidate has fixed points")
    return phi


def isolated_periodic_points(phi, n, n_dense=4096, tol=1e-10):
    """Fixed points of phi^n, by dense sampling and bisection.

    The displacement of the composed map is wrapped to mean in [-pi, pi),
    which removes the full 2*pi winding of phi^n; its fixed points on the
    circle are the zeros of that wrapped displacement.
    """
    power = phi
    for _ in range(n - 1):
        power = compose(phi, power)
    coeffs = compress(transform(power.disp))
    x = np.linspace(0.0, TWO_PI, n_dense + 1)
    vals = evaluate_spectral(coeffs, x)[0]

    def h(point):
        return float(evaluate_spectral(coeffs, np.atleast_1d(point))[0, 0])

    zeros = []
    for i in range(n_dense):
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            zeros.append(x[i])
        elif fa * fb < 0.0:
            lo, hi, flo = x[i], x[i + 1], fa
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                fm = h(mid)
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
                if hi - lo < tol:
                    break
            zeros.append(0.5 * (lo + hi))
    return np.asarray(zeros)


def falsification_search(phi, seed=0, n_fields=64, n_modes=2):
    """Coarse search over a random family of nowhere-vanishing fields for one
    whose time-1 flow reproduces phi; returns the smallest sup-distance.

    The underlying non-surjectivity statement is a theorem; this search is
    illustrative only.
    """
    rng = np.random.default_rng(seed)
    nodes = phi.grid.nodes
    target = phi.values
    mean_disp = float(np.mean(phi.disp.values))
    best = np.inf
    for _ in range(n_fields):
        amp = rng.uniform(0.0, 0.3, size=n_modes)
        phase = rng.uniform(0.0, TWO_PI, size=n_modes)
        speed = rng.uniform(0.5, 1.5) * mean_disp
        vals = np.full_like(nodes, speed)
        for j in range(n_modes):
            vals += speed * amp[j] * np.sin((j + 1) * nodes + phase[j])
        if np.min(np.abs(vals)) <= VANISHING_TOL:
            continue
        u = CircleField(PeriodicFunction(phi.grid, vals[None, :]))
        flowed = flow_autonomous(u, 1.0)
        err = float(np.max(np.abs(_wrap_angle(flowed.values - target))))
        best = min(best, err)
    return best


# ---------------------------------------------------------------------------
# Sobolev-diffeomorphism membership proxy on the line
# ---------------------------------------------------------------------------


def membership_check(f_samples, grid, decay_tol=1e-6):
    """1-D proxy for Id + H^q membership: boundary decay and 1 + f' > 0."""
    f = np.asarray(f_samples, dtype=float)
    nodes = grid.nodes
    if f.shape != nodes.shape:
        raise ValueError("displacement samples do not match the grid")
    if abs(f[0]) > decay_tol or abs(f[-1]) > decay_tol:
        raise ValueError(
            f"displacement does not decay at the window boundary "
            f"(|f| = {max(abs(f[0]), abs(f[-1])):.2e} > {decay_tol:.0e})"
        )
    fprime = np.gradient(f, nodes)
    return bool(np.min(1.0 + fprime) > 0.0)
