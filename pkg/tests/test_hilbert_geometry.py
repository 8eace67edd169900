"""Sphere charts, the sphere metric oracle, and the ellipsoid squeeze."""

import numpy as np
import pytest

from shapegeo import hilbert_geometry as hg
from shapegeo import path_geodesics as pg
from shapegeo.errors import OutOfChart


def gauss_legendre_length_oracle(a_n, order=60):
    """Independent fixed-order Gauss-Legendre quadrature of the arc length."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (nodes + 1.0)
    integrand = np.pi * np.sqrt(np.sin(np.pi * t) ** 2 + a_n**2 * np.cos(np.pi * t) ** 2)
    return 0.5 * float(np.sum(weights * integrand))


class TestCharts:
    def test_roundtrip(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x0 = rng.normal(size=5)
            x0 /= np.linalg.norm(x0)
            x = x0 + 0.4 * rng.normal(size=5)
            x /= np.linalg.norm(x)
            if np.dot(x, x0) <= 0:
                continue
            y = hg.sphere_chart(x0, x)
            back = hg.sphere_chart_inverse(x0, y)
            assert np.linalg.norm(back - x) < 1e-12

    def test_out_of_chart(self):
        e0 = np.array([1.0, 0.0, 0.0])
        with pytest.raises(OutOfChart):
            hg.sphere_chart(e0, -e0)
        with pytest.raises(OutOfChart):
            hg.sphere_chart_inverse(e0, np.array([0.0, 1.5, 0.0]))

    def test_rejects_off_sphere_points(self):
        with pytest.raises(ValueError):
            hg.sphere_chart(np.array([2.0, 0.0]), np.array([1.0, 0.0]))

    def test_analytic_distance(self):
        e0 = np.array([1.0, 0.0])
        e1 = np.array([0.0, 1.0])
        assert abs(hg.sphere_distance_analytic(e0, e1) - np.pi / 2) < 1e-14


class TestSphereOracle:
    def test_restricts_to_ambient_inner_product_on_sphere(self):
        rng = np.random.default_rng(1)
        oracle = hg.sphere_oracle(6)
        x = rng.normal(size=6)
        x /= np.linalg.norm(x)
        h = rng.normal(size=6)
        k = rng.normal(size=6)
        assert abs(oracle.G(x, h, k) - np.dot(h, k)) < 1e-12

    def test_variation_matches_fd(self):
        rng = np.random.default_rng(2)
        oracle = hg.sphere_oracle(5)
        x = rng.normal(size=5)
        x /= np.linalg.norm(x)
        l, h, k = (rng.normal(size=5) for _ in range(3))
        eps = 1e-6
        fd = (oracle.G(x + eps * l, h, k) - oracle.G(x - eps * l, h, k)) / (2 * eps)
        assert abs(oracle.DG(x, l, h, k) - fd) < 1e-7

    def test_rows_consistent(self):
        rng = np.random.default_rng(3)
        oracle = hg.sphere_oracle(5)
        x = rng.normal(size=5)
        h, k = rng.normal(size=5), rng.normal(size=5)
        eye = np.eye(5)
        rows = oracle.rows_G(x, h)
        assert np.max(np.abs(rows - [oracle.G(x, h, e) for e in eye])) < 1e-12
        vrows = oracle.rows_DG(x, h, k)
        assert np.max(np.abs(vrows - [oracle.DG(x, e, h, k) for e in eye])) < 1e-12

    def test_gram_matches_metric(self):
        rng = np.random.default_rng(4)
        oracle = hg.sphere_oracle(4)
        x = rng.normal(size=4)
        gram = oracle.gram_matrix(x)
        eye = np.eye(4)
        direct = np.array([[oracle.G(x, a, b) for b in eye] for a in eye])
        assert np.max(np.abs(gram - direct)) < 1e-12


class TestEllipsoid:
    def test_semi_axes(self):
        spec = hg.EllipsoidSpec(m=6)
        assert np.allclose(spec.semi_axes, [1, 1.5, 1.25, 1.125, 1.0625, 1.03125])

    def test_map_roundtrip(self):
        spec = hg.EllipsoidSpec(m=8)
        rng = np.random.default_rng(5)
        x = rng.normal(size=8)
        assert np.allclose(hg.ellipsoid_map_inverse(spec, hg.ellipsoid_map(spec, x)), x)

    def test_half_great_circle_endpoints(self):
        pts = hg.half_great_circle(3, 32, 8)
        assert np.allclose(pts[0], np.eye(8)[0])
        assert np.allclose(pts[-1], -np.eye(8)[0])
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)

    def test_path_length_matches_quadrature(self):
        spec = hg.EllipsoidSpec(m=8)
        n = 3
        oracle = gauss_legendre_length_oracle(spec.semi_axes[n])
        coarse = hg.ellipsoid_path_length(spec, pg.Path(hg.half_great_circle(n, 128, 8)))
        fine = hg.ellipsoid_path_length(spec, pg.Path(hg.half_great_circle(n, 512, 8)))
        assert abs(fine - oracle) < 1e-4
        # second-order quadrature: refining 4x shrinks the error ~16x
        assert abs(fine - oracle) < abs(coarse - oracle) / 8.0

    def test_grossman_lengths_against_independent_oracle(self):
        spec = hg.EllipsoidSpec(m=24)
        table = hg.grossman_experiment(spec, range(1, 21))
        for n, length, bound in table:
            oracle = gauss_legendre_length_oracle(spec.semi_axes[n])
            assert abs(length - oracle) < 1e-12
            assert np.pi < length <= bound
        lengths = [row[1] for row in table]
        assert all(a > b for a, b in zip(lengths, lengths[1:]))

    def test_grossman_rejects_bad_index(self):
        spec = hg.EllipsoidSpec(m=4)
        with pytest.raises(ValueError):
            hg.grossman_experiment(spec, [4])
