"""Spectral core: transforms, derivatives, Sobolev pairings."""

import numpy as np
import pytest

from shapegeo import periodic_core as pc


def random_bandlimited(rng, n, max_mode, dim=1):
    """Real band-limited function with modes up to max_mode."""
    coeffs = np.zeros((dim, n), dtype=complex)
    for i in range(dim):
        coeffs[i, 0] = rng.normal()
        for k in rng.integers(1, max_mode + 1, size=4):
            a = rng.normal() + 1j * rng.normal()
            coeffs[i, k] += a
            coeffs[i, -k] += np.conj(a)
    return pc.inverse_transform(pc.SpectralCoeffs(pc.PeriodicGrid(n), coeffs))


def dft_oracle(values, n):
    """Direct O(n^2) summation oracle for the forward transform."""
    theta = 2.0 * np.pi * np.arange(n) / n
    k = np.concatenate([np.arange(0, n // 2 + 1), np.arange(-n // 2 + 1, 0)])
    k = np.fft.fftfreq(n, d=1.0 / n)  # standard FFT ordering
    out = np.zeros((values.shape[0], n), dtype=complex)
    for i in range(values.shape[0]):
        for j, kk in enumerate(k):
            out[i, j] = np.sum(values[i] * np.exp(-1j * kk * theta)) / n
    return out


class TestGridAndTransform:
    def test_grid_rejects_non_power_of_two(self):
        for bad in (0, 3, 6, 100):
            with pytest.raises(ValueError):
                pc.PeriodicGrid(bad)

    def test_nodes_uniform(self):
        g = pc.PeriodicGrid(8)
        assert np.allclose(g.nodes, 2 * np.pi * np.arange(8) / 8)
        assert np.all(np.diff(g.nodes) > 0)

    def test_constant_coefficients(self):
        f = pc.PeriodicFunction.from_callable(lambda t: np.ones_like(t), 16)
        c = pc.transform(f)
        assert abs(c.coeffs[0, 0] - 1.0) < 1e-14
        assert np.max(np.abs(c.coeffs[0, 1:])) < 1e-14

    def test_cosine_coefficients(self):
        f = pc.PeriodicFunction.from_callable(np.cos, 16)
        c = pc.transform(f)
        assert abs(c.coeffs[0, 1] - 0.5) < 1e-14
        assert abs(c.coeffs[0, -1] - 0.5) < 1e-14

    def test_transform_matches_direct_summation_oracle(self):
        rng = np.random.default_rng(0)
        f = random_bandlimited(rng, 32, 8, dim=2)
        ours = pc.transform(f).coeffs
        oracle = dft_oracle(f.values, 32)
        assert np.max(np.abs(ours - oracle)) < 1e-12

    def test_roundtrip(self):
        rng = np.random.default_rng(1)
        f = random_bandlimited(rng, 64, 16, dim=3)
        back = pc.inverse_transform(pc.transform(f))
        rel = np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values))
        assert rel < 1e-12

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(2)
        f = pc.PeriodicFunction(pc.PeriodicGrid(32), rng.normal(size=(1, 32)))
        c = pc.transform(f).coeffs[0]
        for k in range(1, 16):
            assert abs(c[k] - np.conj(c[-k])) < 1e-13


class TestEvaluateSpectral:
    def test_interpolation_exact_on_nodes(self):
        rng = np.random.default_rng(3)
        f = random_bandlimited(rng, 32, 8)
        vals = pc.evaluate_spectral(pc.transform(f), f.grid.nodes)
        assert np.max(np.abs(vals - f.values)) < 1e-12

    def test_interpolation_off_grid(self):
        f = pc.PeriodicFunction.from_callable(
            lambda t: np.sin(3 * t) + 0.2 * np.cos(5 * t), 64
        )
        theta = np.random.default_rng(4).uniform(0, 2 * np.pi, 50)
        vals = pc.evaluate_spectral(pc.transform(f), theta)[0]
        assert np.max(np.abs(vals - (np.sin(3 * theta) + 0.2 * np.cos(5 * theta)))) < 1e-12

    def test_compress_preserves_interpolant(self):
        f = pc.PeriodicFunction.from_callable(lambda t: np.exp(np.cos(t)), 128)
        theta = np.linspace(0, 2 * np.pi, 17)
        full = pc.evaluate_spectral(pc.transform(f), theta)
        trimmed = pc.evaluate_spectral(pc.compress(pc.transform(f)), theta)
        assert np.max(np.abs(full - trimmed)) < 1e-12


class TestDerivative:
    def test_constant(self):
        f = pc.PeriodicFunction.from_callable(lambda t: np.ones_like(t), 16)
        assert np.max(np.abs(pc.derivative(f, 1).values)) < 1e-14

    def test_sin_to_cos(self):
        f = pc.PeriodicFunction.from_callable(np.sin, 64)
        d = pc.derivative(f, 1)
        assert np.max(np.abs(d.values[0] - np.cos(d.grid.nodes))) < 1e-12

    def test_second_derivative_vs_fd_oracle(self):
        # finite differences on a 4x finer grid
        n, fine = 64, 256
        f = pc.PeriodicFunction.from_callable(lambda t: np.cos(3 * t), n)
        d2 = pc.derivative(f, 2).values[0]
        nodes_fine = 2 * np.pi * np.arange(fine) / fine
        vals_fine = np.cos(3 * nodes_fine)
        h = 2 * np.pi / fine
        fd = (np.roll(vals_fine, -1) - 2 * vals_fine + np.roll(vals_fine, 1)) / h**2
        assert np.max(np.abs(d2 - fd[:: fine // n])) < 1e-2
        assert np.max(np.abs(d2 + 9 * np.cos(3 * f.grid.nodes))) < 1e-10

    def test_invalid_order(self):
        f = pc.PeriodicFunction.from_callable(np.sin, 16)
        with pytest.raises(ValueError):
            pc.derivative(f, 0)

    def test_skew_adjoint_against_l2(self):
        rng = np.random.default_rng(5)
        f = random_bandlimited(rng, 64, 12)
        g = random_bandlimited(rng, 64, 12)
        a = pc.sobolev_inner_product(pc.derivative(f, 1), g, 0)
        b = pc.sobolev_inner_product(f, pc.derivative(g, 1), 0)
        assert abs(a + b) < 1e-10


class TestSobolevPairings:
    def test_constant_all_orders(self):
        one = pc.PeriodicFunction.from_callable(lambda t: np.ones_like(t), 32)
        for q in (0, 0.5, 1, 2, 3):
            assert abs(pc.sobolev_inner_product(one, one, q) - 1.0) < 1e-13

    def test_sin_closed_form(self):
        sin = pc.PeriodicFunction.from_callable(np.sin, 64)
        for q in (0, 1, 2, 3):
            assert abs(pc.sobolev_inner_product(sin, sin, q) - 2.0 ** (q - 1)) < 1e-12

    def test_sin_cos_orthogonal(self):
        sin = pc.PeriodicFunction.from_callable(np.sin, 64)
        cos = pc.PeriodicFunction.from_callable(np.cos, 64)
        assert abs(pc.sobolev_inner_product(sin, cos, 1)) < 1e-13

    def test_negative_order_rejected(self):
        f = pc.PeriodicFunction.from_callable(np.sin, 16)
        with pytest.raises(ValueError):
            pc.sobolev_inner_product(f, f, -1)
        with pytest.raises(ValueError):
            pc.sobolev_inner_product_integer(f, f, -1)

    def test_integer_form_hand_values(self):
        sin = pc.PeriodicFunction.from_callable(np.sin, 64)
        cos2 = pc.PeriodicFunction.from_callable(lambda t: np.cos(2 * t), 64)
        assert abs(pc.sobolev_inner_product_integer(sin, sin, 1) - 1.0) < 1e-12
        assert abs(pc.sobolev_inner_product_integer(cos2, cos2, 1) - 2.5) < 1e-12
        assert abs(pc.sobolev_inner_product_integer(cos2, cos2, 2) - 8.5) < 1e-12
        assert abs(pc.sobolev_inner_product(cos2, cos2, 2) - 12.5) < 1e-12

    def test_forms_agree_at_q0_and_q1_single_modes(self):
        for k in range(0, 6):
            f = pc.PeriodicFunction.from_callable(
                (lambda t, k=k: np.cos(k * t)), 64
            )
            for q in (0, 1):
                a = pc.sobolev_inner_product(f, f, q)
                b = pc.sobolev_inner_product_integer(f, f, q)
                assert abs(a - b) < 1e-12 * max(1.0, abs(a))

    def test_norm_ratio_within_weight_bounds(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            f = random_bandlimited(rng, 64, 10)
            q = 2
            a = pc.sobolev_inner_product(f, f, q)
            b = pc.sobolev_inner_product_integer(f, f, q)
            k = np.arange(0, 11, dtype=float)
            w = (1.0 + k ** (2 * q)) / (1.0 + k**2) ** q
            assert np.min(w) - 1e-10 <= b / a <= np.max(w) + 1e-10

    def test_bilinearity_and_symmetry(self):
        rng = np.random.default_rng(7)
        f = random_bandlimited(rng, 32, 8)
        g = random_bandlimited(rng, 32, 8)
        h = random_bandlimited(rng, 32, 8)
        for ip in (
            lambda a, b: pc.sobolev_inner_product(a, b, 1.5),
            lambda a, b: pc.sobolev_inner_product_integer(a, b, 2),
        ):
            assert abs(ip(f, g) - ip(g, f)) < 1e-12
            lhs = ip(pc.PeriodicFunction(f.grid, 2.0 * f.values + g.values), h)
            assert abs(lhs - 2.0 * ip(f, h) - ip(g, h)) < 1e-10

    def test_parseval(self):
        rng = np.random.default_rng(8)
        f = random_bandlimited(rng, 64, 12, dim=2)
        g = random_bandlimited(rng, 64, 12, dim=2)
        integrand = np.sum(f.values * g.values, axis=0)
        quad = np.sum(integrand) / 64  # (1/2pi) * trapezoid on the periodic grid
        mode = pc.sobolev_inner_product(f, g, 0)
        assert abs(quad - mode) < 1e-10 * max(1.0, abs(mode))


class TestSupNormAndMultiply:
    def test_sup_norm_values(self):
        zero = pc.PeriodicFunction(pc.PeriodicGrid(32), np.zeros((1, 32)))
        assert pc.sup_norm(zero) == 0.0
        sin = pc.PeriodicFunction.from_callable(np.sin, 256)
        assert abs(pc.sup_norm(sin) - 1.0) < 1.0 / 256**2 + 1e-12

    def test_sup_norm_vs_dense_oracle(self):
        rng = np.random.default_rng(9)
        f = random_bandlimited(rng, 64, 8)
        dense = np.linspace(0, 2 * np.pi, 64 * 16, endpoint=False)
        oracle = np.max(np.abs(pc.evaluate_spectral(pc.transform(f), dense)))
        assert pc.sup_norm(f) <= oracle + 1e-12
        assert oracle - pc.sup_norm(f) < 1e-2 * max(1.0, oracle)

    def test_multiply_identity_and_trig(self):
        sin = pc.PeriodicFunction.from_callable(np.sin, 64)
        one = pc.PeriodicFunction.from_callable(lambda t: np.ones_like(t), 64)
        assert np.max(np.abs(pc.pointwise_multiply(sin, one).values - sin.values)) < 1e-14
        sq = pc.pointwise_multiply(sin, sin)
        expect = (1 - np.cos(2 * sq.grid.nodes)) / 2
        assert np.max(np.abs(sq.values[0] - expect)) < 1e-12

    def test_multiply_rejects_vector_valued(self):
        f = pc.PeriodicFunction(pc.PeriodicGrid(16), np.zeros((2, 16)))
        with pytest.raises(ValueError):
            pc.pointwise_multiply(f, f)

    def test_algebra_constant_stable_under_refinement(self):
        # empirical H^1 algebra constant stays within +-20% from n=64 to n=256
        def empirical_constant(n, rng):
            best = 0.0
            for _ in range(200):
                f = random_bandlimited(rng, n, 8)
                g = random_bandlimited(rng, n, 8)
                num = np.sqrt(
                    pc.sobolev_inner_product(
                        pc.pointwise_multiply(f, g), pc.pointwise_multiply(f, g), 1
                    )
                )
                den = np.sqrt(pc.sobolev_inner_product(f, f, 1)) * np.sqrt(
                    pc.sobolev_inner_product(g, g, 1)
                )
                best = max(best, num / den)
            return best

        c64 = empirical_constant(64, np.random.default_rng(10))
        c256 = empirical_constant(256, np.random.default_rng(10))
        assert abs(c64 - c256) / c64 < 0.2


class TestEmbedding:
    def test_sup_norm_bounded_by_hq_norm_with_mode_sum_constant(self):
        rng = np.random.default_rng(11)
        n, q = 64, 1
        ks = pc.PeriodicGrid(n).wavenumbers.astype(float)
        const = np.sqrt(np.sum((1.0 + ks**2) ** (-q)))
        for _ in range(500):
            f = random_bandlimited(rng, n, 15)
            lhs = pc.sup_norm(f)
            rhs = const * np.sqrt(pc.sobolev_inner_product(f, f, q))
            assert lhs <= rhs + 1e-12
