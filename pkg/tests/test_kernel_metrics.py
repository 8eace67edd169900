"""RKHS kernels and the induced landmark metric."""

import numpy as np
import pytest

from shapegeo import kernel_metrics as km
from shapegeo import path_geodesics as pg
from shapegeo.errors import DegenerateConfig


def random_config(rng, n, d, spread=3.0):
    while True:
        pts = rng.uniform(-spread, spread, size=(n, d))
        try:
            return km.LandmarkConfig(pts)
        except DegenerateConfig:
            continue


class TestKernels:
    def test_gaussian_at_zero(self):
        assert km.gaussian_kernel(2.0).at_zero() == 1.0

    def test_sobolev_greens_functions(self):
        assert abs(km.sobolev_kernel_eval(1, 0.0, 0.0) - 0.5) < 1e-15
        assert abs(km.sobolev_kernel_eval(2, 0.0, 0.0) - 0.25) < 1e-15
        r = 1.3
        assert abs(km.sobolev_kernel_eval(1, r, 0.0) - 0.5 * np.exp(-r)) < 1e-15
        assert abs(
            km.sobolev_kernel_eval(2, r, 0.0) - 0.25 * (1 + r) * np.exp(-r)
        ) < 1e-15

    def test_invalid_kernels_rejected(self):
        with pytest.raises(ValueError):
            km.Kernel(kind="matern")
        with pytest.raises(ValueError):
            km.sobolev_kernel(3)
        with pytest.raises(ValueError):
            km.gaussian_kernel(-1.0)


class TestGram:
    def test_spd_over_many_random_configs(self):
        rng = np.random.default_rng(0)
        kernels = [km.gaussian_kernel(1.0), km.sobolev_kernel(1), km.sobolev_kernel(2)]
        min_eig = np.inf
        for i in range(300):
            kernel = kernels[i % 3]
            cfg = random_config(rng, int(rng.integers(2, 6)), int(rng.integers(1, 4)))
            gram = km.gram_assemble(kernel, cfg)
            assert np.max(np.abs(gram - gram.T)) < 1e-14
            w = np.linalg.eigvalsh(gram)  # independent eigensolve oracle
            assert w.min() > 0
            min_eig = min(min_eig, w.min())
        assert min_eig > 0

    def test_block_structure(self):
        kernel = km.gaussian_kernel(1.0)
        cfg = km.LandmarkConfig(np.array([[0.0, 0.0], [1.0, 0.0]]))
        gram = km.gram_assemble(kernel, cfg)
        k01 = kernel.profile(1.0)
        expect = np.kron(np.array([[1.0, k01], [k01, 1.0]]), np.eye(2))
        assert np.max(np.abs(gram - expect)) < 1e-14

    def test_degenerate_config_rejected(self):
        with pytest.raises(DegenerateConfig):
            km.LandmarkConfig(np.array([[0.0, 0.0], [0.0, 1e-9]]))


class TestLiftAndMetric:
    def test_lift_interpolates(self):
        rng = np.random.default_rng(1)
        kernel = km.sobolev_kernel(2)
        cfg = random_config(rng, 4, 2)
        h = rng.normal(size=(4, 2))
        p, field = km.horizontal_lift(kernel, cfg, h)
        assert np.max(np.abs(field(cfg.points) - h)) < 1e-10

    def test_metric_is_rkhs_norm_of_lift(self):
        rng = np.random.default_rng(2)
        kernel = km.gaussian_kernel(1.5)
        cfg = random_config(rng, 5, 2)
        h = rng.normal(size=(5, 2))
        p, _ = km.horizontal_lift(kernel, cfg, h)
        a = km.induced_metric(kernel, cfg, h)
        b = km.rkhs_inner(kernel, cfg.points, p, cfg.points, p)
        assert abs(a - b) < 1e-10 * max(1.0, abs(a))

    def test_constrained_qp_realizes_the_infimum(self):
        rng = np.random.default_rng(3)
        for kernel in (km.gaussian_kernel(1.0), km.sobolev_kernel(1)):
            cfg = random_config(rng, 4, 2)
            h = rng.normal(size=(4, 2))
            extra = rng.uniform(-4, 4, size=(5, 2))
            direct = km.induced_metric(kernel, cfg, h)
            qp = km.constrained_infimum(kernel, cfg, h, extra)
            assert abs(direct - qp) < 1e-8 * max(1.0, abs(direct))

    def test_vertical_pythagoras(self):
        rng = np.random.default_rng(4)
        kernel = km.gaussian_kernel(1.0)
        cfg = random_config(rng, 4, 2)
        z = np.vstack([cfg.points, rng.uniform(-4, 4, size=(3, 2))])
        mu = rng.normal(size=z.shape)
        p, vals, (nx, nh, nv) = km.vertical_project(kernel, cfg, z, mu)
        assert abs(nx - nh - nv) < 1e-9 * max(1.0, nx)
        assert nv >= -1e-12

    def test_rigid_motion_invariance(self):
        rng = np.random.default_rng(5)
        kernel = km.gaussian_kernel(1.0)
        cfg = random_config(rng, 5, 2)
        h = rng.normal(size=(5, 2))
        theta = 0.7
        rot = np.array(
            [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
        )
        shift = np.array([2.0, -1.0])
        moved = km.LandmarkConfig(cfg.points @ rot.T + shift)
        a = km.induced_metric(kernel, cfg, h)
        b = km.induced_metric(kernel, moved, h @ rot.T)
        assert abs(a - b) < 1e-10 * max(1.0, abs(a))

    def test_admissibility_bound(self):
        rng = np.random.default_rng(6)
        for kernel in (km.gaussian_kernel(0.7), km.sobolev_kernel(2)):
            for _ in range(50):
                cfg = random_config(rng, int(rng.integers(2, 6)), 2)
                h = rng.normal(size=(cfg.n_points, 2))
                lhs, rhs = km.admissibility_bound_check(kernel, cfg, h)
                assert lhs <= rhs + 1e-10

    def test_merging_landmarks_blow_up(self):
        kernel = km.gaussian_kernel(1.0)
        h = np.array([[1.0], [-1.0]])
        prev = None
        for eps in 2.0 ** -np.arange(0, 8):
            cfg = km.LandmarkConfig(np.array([[0.0], [eps]]))
            val = km.induced_metric(kernel, cfg, h)
            if prev is not None:
                assert val > prev
            prev = val


class TestLandmarkOracle:
    def test_variation_matches_fd(self):
        rng = np.random.default_rng(7)
        for kernel in (km.gaussian_kernel(1.0), km.sobolev_kernel(2)):
            oracle = km.landmark_metric_oracle(kernel, 2, 4)
            x = random_config(rng, 4, 2).points.reshape(-1)
            l, h, k = (rng.normal(size=8) for _ in range(3))
            eps = 1e-6
            fd = (oracle.G(x + eps * l, h, k) - oracle.G(x - eps * l, h, k)) / (2 * eps)
            assert abs(oracle.DG(x, l, h, k) - fd) < 1e-6 * max(1.0, abs(fd))

    def test_rows_consistent(self):
        rng = np.random.default_rng(8)
        kernel = km.gaussian_kernel(1.0)
        oracle = km.landmark_metric_oracle(kernel, 2, 3)
        x = random_config(rng, 3, 2).points.reshape(-1)
        h, k = rng.normal(size=6), rng.normal(size=6)
        eye = np.eye(6)
        rows = oracle.rows_G(x, h)
        assert np.max(np.abs(rows - [oracle.G(x, h, e) for e in eye])) < 1e-12
        vrows = oracle.rows_DG(x, h, k)
        assert np.max(np.abs(vrows - [oracle.DG(x, e, h, k) for e in eye])) < 1e-11

    def test_two_landmark_geodesic_and_permutation(self):
        kernel = km.gaussian_kernel(1.0)
        oracle = km.landmark_metric_oracle(kernel, 1, 2)
        opts = pg.SolverOptions(tol=1e-7, max_iter=20000)
        a = np.array([-2.0, 2.0])
        b = np.array([-1.0, 3.0])
        path, report = pg.bvp_minimize(a, b, oracle, init=pg.Path.linear(a, b, 16), opts=opts)
        assert report.converged
        d_ab = pg.path_length(path, oracle)
        path2, report2 = pg.bvp_minimize(
            a[::-1].copy(), b[::-1].copy(), oracle,
            init=pg.Path.linear(a[::-1], b[::-1], 16), opts=opts,
        )
        assert abs(d_ab - pg.path_length(path2, oracle)) < 1e-8
        # far-separated landmarks barely interact: length close to flat motion
        flat = np.sqrt(np.sum((b - a) ** 2))
        assert d_ab > 0
        assert abs(d_ab - flat) < 0.2 * flat
