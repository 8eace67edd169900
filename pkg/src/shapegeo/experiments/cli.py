"""Command-line experiment runner.

Usage: ``shapegeo <subcommand> [--config FILE] [--set key=value]... [--out DIR]``

Each subcommand writes table.csv, plot.svg and manifest.txt into the
output directory.  The manifest is itself a valid config file, so
``shapegeo <subcommand> --config OUT/manifest.txt`` reproduces the table
exactly.  The environment variable SHAPEGEO_SEED overrides the config
seed.  Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .. import curves, diffeo_flows, hilbert_geometry, kernel_metrics
from .. import path_geodesics as pg
from .. import periodic_core as pc
from ..errors import ShapeGeoError
from .io import ConfigError, load_config_file, parse_overrides, svg_plot, write_csv, write_manifest

__all__ = ["main", "run_experiment", "EXPERIMENTS"]


# ---------------------------------------------------------------------------
# Experiment implementations: config -> (columns, rows, plot writer)
# ---------------------------------------------------------------------------


def _run_grossman(config, out_dir):
    spec = hilbert_geometry.EllipsoidSpec(m=config["m"])
    n_list = range(config["n_min"], config["n_max"] + 1)
    table = hilbert_geometry.grossman_experiment(spec, n_list)
    columns = ["n", "length", "bound"]
    rows = [list(r) for r in table]
    ns = [r[0] for r in rows]
    svg_plot(
        os.path.join(out_dir, "plot.svg"),
        series=[
            ("Len(F c_n)", ns, [r[1] for r in rows]),
            ("(1+2^-n) pi", ns, [r[2] for r in rows]),
        ],
        title="Ellipsoid half-great-circle lengths",
        xlabel="n",
        ylabel="length",
        hlines=[("pi", float(np.pi))],
    )
    return columns, rows


def _run_vanishing_l2(config, out_dir):
    opts = pg.SolverOptions(tol=config["tol"], max_iter=config["max_iter"])
    rows_l2 = pg.vanishing_distance_experiment(
        levels=config["levels"],
        base_samples=config["base_samples"],
        base_steps=config["base_steps"],
        opts=opts,
    )
    rows_flat = pg.vanishing_distance_experiment(
        levels=config["levels"],
        base_samples=config["base_samples"],
        base_steps=config["base_steps"],
        control=True,
        opts=opts,
    )
    columns = ["teeth", "l2_length", "flat_length"]
    rows = [
        [teeth, length, flat]
        for (teeth, length), (_, flat) in zip(rows_l2, rows_flat)
    ]
    svg_plot(
        os.path.join(out_dir, "plot.svg"),
        series=[
            ("L2 metric", [r[0] for r in rows], [r[1] for r in rows]),
            ("flat control", [r[0] for r in rows], [r[2] for r in rows]),
        ],
        title="Vanishing L2 geodesic distance",
        xlabel="sawtooth teeth",
        ylabel="achieved path length",
    )
    return columns, rows


def _run_sphere_bvp(config, out_dir):
    m = config["m"]
    rng = np.random.default_rng(config["seed"])
    oracle = hilbert_geometry.sphere_oracle(m)
    opts = pg.SolverOptions(tol=config["tol"], max_iter=config["max_iter"])
    columns = ["pair", "length", "analytic", "abs_err"]
    rows = []
    for i in range(config["n_pairs"]):
        x = rng.normal(size=m)
        x /= np.linalg.norm(x)
        y = rng.normal(size=m)
        y /= np.linalg.norm(y)
        init = pg.Path.linear(x, y, config["n_steps"])
        # project the chord onto the sphere so all iterates start near it
        pts = init.points / np.linalg.norm(init.points, axis=1, keepdims=True)
        path, _ = pg.bvp_minimize(x, y, oracle, init=pg.Path(pts), opts=opts)
        length = pg.path_length(path, oracle)
        exact = hilbert_geometry.sphere_distance_analytic(x, y)
        rows.append([i, length, exact, abs(length - exact)])
    svg_plot(
        os.path.join(out_dir, "plot.svg"),
        series=[("abs error", [r[0] for r in rows], [max(r[3], 1e-17) for r in rows])],
        title="Sphere BVP vs arccos distance",
        xlabel="pair index",
        ylabel="absolute error",
        logy=True,
    )
    return columns, rows


def _run_exp_circle(config, out_dir):
    n = config["n_samples"]
    u = diffeo_flows.CircleField.from_callable(
        lambda th: 1.0 + 0.5 * np.sin(th), n
    )
    eta, c = diffeo_flows.conjugate_to_rotation(u)
    phi = diffeo_flows.flow_autonomous(u, 1.0)
    rot = diffeo_flows.CircleDiffeo.rotation(c, n)
    conj = diffeo_flows.compose(
        diffeo_flows.invert(eta), diffeo_flows.compose(rot, eta)
    )
    conj_err = float(
        np.max(np.abs(diffeo_flows._wrap_angle(conj.values - phi.values)))
    )
    grid = pc.PeriodicGrid(n)
    order = config["rotation_order"]

    def make_psi(amp):
        disp = amp * np.sin(order * grid.nodes)
        return diffeo_flows.CircleDiffeo(pc.PeriodicFunction(grid, disp[None, :]))

    u1, err1 = diffeo_flows.exp_noninjectivity_demo(
        make_psi(config["amplitude_1"]), order
    )
    u2, err2 = diffeo_flows.exp_noninjectivity_demo(
        make_psi(config["amplitude_2"]), order
    )
    field_sep = float(np.max(np.abs(u1.u.values - u2.u.values)))
    columns = [
        "c",
        "c_exact",
        "conjugation_sup_err",
        "flow_err_1",
        "flow_err_2",
        "field_separation",
    ]
    rows = [[c, float(np.sqrt(0.75)), conj_err, err1, err2, field_sep]]
    nodes = grid.nodes
    svg_plot(
        os.path.join(out_dir, "plot.svg"),
        series=[
            ("u = 1 + 0.5 sin", nodes, u.u.values[0]),
            ("u1 (noninjectivity)", nodes, u1.u.values[0]),
            ("u2 (noninjectivity)", nodes, u2.u.values[0]),
        ],
        title="Exponential-map constructions on Diff(S1)",
        xlabel="theta",
        ylabel="field value",
    )
    return columns, rows


def _run_blowup(config, out_dir):
    grid = diffeo_flows.RealGrid(
        half_width=config["half_width"], n_nodes=config["n_nodes"]
    )
    field = grid.nodes**2
    tf = diffeo_flows.TimeDependentField.uniform(
        [field], grid, 0.0, config["t_end"]
    )
    result = diffeo_flows.flow_time_dependent(tf, x0=np.array([config["x0"]]))
    if not result.blow_up:
        raise ShapeGeoError("expected blow-up was not observed")
    exact = 1.0 / config["x0"]
    columns = ["x0", "blow_up_time", "exact", "abs_err"]
    rows = [
        [
            config["x0"],
            result.blow_up_time,
            exact,
            abs(result.blow_up_time - exact),
        ]
    ]
    # trajectory of the analytic solution up to the window exit
    ts = np.linspace(0.0, result.blow_up_time, 200)
    xs = config["x0"] / (1.0 - ts * config["x0"])
    svg_plot(
        os.path.join(out_dir, "plot.svg"),
        series=[("x(t) = x0/(1 - t x0)", ts, xs)],
        title="Finite-time blow-up of dx/dt = x^2",
        xlabel="t",
        ylabel="x",
        logy=True,
    )
    return columns, rows


def _run_landmark_geodesic(config, out_dir):
    kernel = kernel_metrics.gaussian_kernel(config["sigma"])
    start = np.array([config["q1_start"], config["q2_start"]])
    end = np.array([config["q1_end"], config["q2_end"]])
    oracle = kernel_metrics.landmark_metric_oracle(kernel, 1, 2)
    opts = pg.SolverOptions(tol=config["tol"], max_iter=config["max_iter"])
    init = pg.Path.linear(start, end, config["n_steps"])
    path, report = pg.bvp_minimize(start, end, oracle, init=init, opts=opts)
    length = pg.path_length(path, oracle)
    columns = ["t", "i", "x1"]
    rows = []
    times = path.times
    for j, t in enumerate(times):
        for i in range(2):
            rows.append([t, i, path.points[j, i]])
    svg_plot(
        os.path.join(out_dir, "plot.svg"),
        series=[
            ("landmark 1", times, path.points[:, 0]),
            ("landmark 2", times, path.points[:, 1]),
        ],
        title="Two-landmark geodesic (Gaussian kernel)",
        xlabel="t",
        ylabel="position",
    )
    return columns, rows, {"geodesic_length": length, "converged": report.converged}


def _run_lddmm_flow(config, out_dir):
    grid = diffeo_flows.RealGrid(
        half_width=config["half_width"], n_nodes=config["n_nodes"]
    )
    x = grid.nodes
    fields = [
        np.sin(x) * np.exp(-0.1 * x**2),
        np.cos(2.0 * x) * np.exp(-0.1 * x**2),
    ]
    tf = diffeo_flows.TimeDependentField.uniform(fields, grid, 0.0, 1.0)
    probe = np.linspace(-3.0, 3.0, config["n_probe"])
    fwd = diffeo_flows.flow_time_dependent(tf, x0=probe)
    back = diffeo_flows.flow_time_dependent(tf.reversed(), x0=fwd.final_map)
    if fwd.blow_up or back.blow_up:
        raise ShapeGeoError("decaying-field flow unexpectedly left the window")
    disp = fwd.final_map - probe
    membership = diffeo_flows.membership_check(
        np.interp(x, probe, disp, left=0.0, right=0.0), grid
    )
    columns = ["x0", "x_forward", "x_return", "return_err"]
    rows = [
        [probe[i], fwd.final_map[i], back.final_map[i], abs(back.final_map[i] - probe[i])]
        for i in range(len(probe))
    ]
    svg_plot(
        os.path.join(out_dir, "plot.svg"),
        series=[
            ("forward flow", probe, fwd.final_map),
            ("after reversal", probe, back.final_map),
            ("identity", probe, probe),
        ],
        title="Time-dependent flow and its reversal",
        xlabel="x0",
        ylabel="position",
    )
    return columns, rows, {"membership_check": membership}


def _run_sobolev_props(config, out_dir):
    n = config["n_samples"]
    columns = ["k", "q", "mode_sum", "integer_form", "ratio", "weight"]
    rows = []
    for k in range(0, config["k_max"] + 1):
        f = pc.PeriodicFunction.from_callable(
            (lambda th, k=k: np.cos(k * th)), n
        )
        for q in (0, 1, 2):
            a = pc.sobolev_inner_product(f, f, q)
            b = pc.sobolev_inner_product_integer(f, f, q)
            if q == 0:
                weight = 1.0  # both forms are the plain L^2 pairing
            else:
                weight = (1.0 + float(k) ** (2 * q)) / (1.0 + float(k) ** 2) ** q
            rows.append([k, q, a, b, b / a, weight])
    ks = sorted(set(r[0] for r in rows))
    series = []
    for q in (0, 1, 2):
        vals = [r[4] for r in rows if r[1] == q]
        series.append((f"ratio at q={q}", ks, vals))
    svg_plot(
        os.path.join(out_dir, "plot.svg"),
        series=series,
        title="Integer-form / mode-sum ratio per single mode",
        xlabel="mode k",
        ylabel="ratio",
    )
    return columns, rows


EXPERIMENTS = {
    "grossman": (
        _run_grossman,
        {"m": 24, "n_min": 1, "n_max": 20, "seed": 0},
    ),
    "vanishing-l2": (
        _run_vanishing_l2,
        {
            "levels": 3,
            "base_samples": 64,
            "base_steps": 16,
            "tol": 1e-6,
            "max_iter": 4000,
            "seed": 0,
        },
    ),
    "sphere-bvp": (
        _run_sphere_bvp,
        {
            "m": 10,
            "n_pairs": 20,
            "n_steps": 48,
            "tol": 1e-6,
            "max_iter": 3000,
            "seed": 42,
        },
    ),
    "exp-circle": (
        _run_exp_circle,
        {
            "n_samples": 256,
            "rotation_order": 3,
            "amplitude_1": 0.05,
            "amplitude_2": 0.08,
            "seed": 0,
        },
    ),
    "blowup": (
        _run_blowup,
        {
            "x0": 2.0,
            "half_width": 10000.0,
            "n_nodes": 32768,
            "t_end": 1.0,
            "seed": 0,
        },
    ),
    "landmark-geodesic": (
        _run_landmark_geodesic,
        {
            "sigma": 1.0,
            "q1_start": -2.0,
            "q2_start": 2.0,
            "q1_end": -1.0,
            "q2_end": 3.0,
            "n_steps": 16,
            "tol": 1e-6,
            "max_iter": 20000,
            "seed": 0,
        },
    ),
    "lddmm-flow": (
        _run_lddmm_flow,
        {"half_width": 10.0, "n_nodes": 2048, "n_probe": 61, "seed": 0},
    ),
    "sobolev-props": (
        _run_sobolev_props,
        {"n_samples": 64, "k_max": 8, "seed": 0},
    ),
}


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def _assemble_config(name, args):
    runner, defaults = EXPERIMENTS[name]
    config = dict(defaults)
    if args.config is not None:
        file_config = load_config_file(args.config)
        file_config.pop("experiment", None)
        config.update(file_config)
    config.update(parse_overrides(args.set or []))
    env_seed = os.environ.get("SHAPEGEO_SEED")
    if env_seed is not None:
        try:
            config["seed"] = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"SHAPEGEO_SEED must be an integer: {env_seed!r}") from exc
    unknown = set(config) - set(defaults)
    if unknown:
        raise ConfigError(
            f"unknown config keys for {name}: {', '.join(sorted(unknown))}"
        )
    return runner, config


def run_experiment(name, config, out_dir):
    """Run one experiment and write table.csv, plot.svg, manifest.txt."""
    runner, defaults = EXPERIMENTS[name]
    os.makedirs(out_dir, exist_ok=True)
    result = runner(config, out_dir)
    if len(result) == 3:
        columns, rows, extras = result
    else:
        columns, rows = result
        extras = {}
    write_csv(os.path.join(out_dir, "table.csv"), columns, rows)
    write_manifest(os.path.join(out_dir, "manifest.txt"), name, config, extras)
    return columns, rows


def _write_error_record(out_dir, exc):
    from .io import atomic_write_text

    try:
        os.makedirs(out_dir, exist_ok=True)
        atomic_write_text(
            os.path.join(out_dir, "error.txt"),
            f"error_type = {type(exc).__name__}\nmessage = {exc}\n",
        )
    except OSError:
        pass


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="shapegeo",
        description="Weak-Riemannian-geometry experiment runner.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="key=value",
            help="config override (repeatable, later wins)",
        )
        p.add_argument("--out", default=None, help="output directory")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which matches the config-error code
        return int(exc.code) if exc.code else 0

    name = args.experiment
    out_dir = args.out if args.out is not None else os.path.join("out", name)
    try:
        runner, config = _assemble_config(name, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        run_experiment(name, config, out_dir)
    except (ShapeGeoError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        _write_error_record(out_dir, exc)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
