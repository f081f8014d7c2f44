import numpy as np
import pytest

from sphereshg.errors import ConfigurationError
from sphereshg.resonance import SigmaRational
from sphereshg.spectral import SphereGrid, SpectralField, dyadic_project, synthesize
from sphereshg.strichartz import (
    FitResult,
    ScanConfig,
    bilinear_product_norm,
    product_grid,
    product_l2_norm,
    projector_bilinear_ratio,
    random_localized,
    required_time_nodes,
    run_bilinear_scan,
    run_projector_scan,
    scaling_fit,
    structured_pair_ratio,
)

S1 = SigmaRational(1, 1)
S14 = SigmaRational(1, 4)


class TestRandomLocalized:
    def test_block_support_and_norm(self):
        f = random_localized(4, 16, 123)
        assert f.l2_norm() == pytest.approx(1.0, abs=1e-12)
        proj = dyadic_project(f, 4)
        assert np.array_equal(proj.coeffs, f.coeffs)

    def test_seed_determinism(self):
        a = random_localized(4, 16, 9)
        b = random_localized(4, 16, 9)
        c = random_localized(4, 16, 10)
        assert np.array_equal(a.coeffs, b.coeffs)
        assert not np.array_equal(a.coeffs, c.coeffs)

    def test_empty_block_rejected(self):
        with pytest.raises(ConfigurationError):
            random_localized(16, 4, 0)


class TestBilinearProductNorm:
    def test_zero_mode_constant_product(self):
        g = SphereGrid(8)
        z = SpectralField.basis(2, 0, 0)
        val = bilinear_product_norm(z, z, S14, "+", g)
        assert val == pytest.approx(1.0 / np.sqrt(4 * np.pi), abs=1e-12)

    def test_homogeneity_is_exact(self):
        g = SphereGrid(8)
        u0 = random_localized(2, 8, 5)
        v0 = random_localized(4, 8, 6)
        base = bilinear_product_norm(u0, v0, S14, "+", g)
        c = 3.5 - 1.25j
        scaled = bilinear_product_norm(u0.scaled(c), v0, S14, "+", g)
        assert abs(scaled - abs(c) * base) <= 1e-12 * base

    def test_single_modes_match_spatial_product(self):
        g = SphereGrid(8)
        y40 = SpectralField.basis(6, 4, 0)
        y20 = SpectralField.basis(6, 2, 0)
        got = bilinear_product_norm(y40, y20, S1, "+", g)
        want = product_l2_norm(synthesize(y40, g), synthesize(y20, g), g)
        assert abs(got - want) <= 1e-10

    def test_node_count_stability(self):
        g = SphereGrid(8)
        u0 = random_localized(2, 8, 1)
        v0 = random_localized(4, 8, 2)
        n_req = required_time_nodes(u0, v0, S14)
        a = bilinear_product_norm(u0, v0, S14, "+", g)
        b = bilinear_product_norm(u0, v0, S14, "+", g, n_t=2 * n_req)
        assert abs(a - b) <= 1e-10

    def test_insufficient_nodes_rejected(self):
        g = SphereGrid(8)
        u0 = random_localized(2, 8, 1)
        v0 = random_localized(4, 8, 2)
        n_req = required_time_nodes(u0, v0, S14)
        with pytest.raises(ConfigurationError):
            bilinear_product_norm(u0, v0, S14, "+", g, n_t=n_req - 1)

    def test_conjugation_parity(self):
        g = SphereGrid(8)
        u0 = random_localized(2, 8, 3)
        v0 = random_localized(4, 8, 4)
        minus = bilinear_product_norm(u0, v0, S14, "-", g)
        plus_conj = bilinear_product_norm(u0.conjugate_field(), v0, S14, "+", g)
        assert abs(minus - plus_conj) <= 1e-13

    def test_grid_too_small(self):
        u0 = random_localized(4, 10, 1)
        v0 = random_localized(4, 10, 2)
        with pytest.raises(ConfigurationError):
            bilinear_product_norm(u0, v0, S14, "+", SphereGrid(4))

    def test_zero_field_rejected(self):
        g = SphereGrid(8)
        with pytest.raises(ConfigurationError):
            bilinear_product_norm(SpectralField.zeros(8), SpectralField.basis(8, 0, 0),
                                  S14, "+", g)

    def test_quad_grid_equals_default_grid(self):
        u0 = random_localized(2, 8, 5)
        v0 = random_localized(8, 20, 6)
        a = bilinear_product_norm(u0, v0, S14, "+", product_grid(3, 17))
        b = bilinear_product_norm(u0, v0, S14, "+", SphereGrid(17))
        assert abs(a - b) <= 1e-12


class TestProjectorRatio:
    def test_zonal_self_product_matches_quadrature(self):
        k = 6
        g = product_grid(k, k)
        fine = SphereGrid(4 * k)  # denser independent quadrature
        y = SpectralField.basis(k, k, 0)
        a = product_l2_norm(synthesize(y, g), synthesize(y, g), g)
        b = product_l2_norm(synthesize(y.pad_to(4 * k), fine),
                            synthesize(y.pad_to(4 * k), fine), fine)
        assert abs(a - b) <= 1e-10

    def test_unimodular_invariance(self):
        g = product_grid(5, 7)
        rng = np.random.default_rng(0)
        f1 = synthesize(SpectralField.random(5, rng).pad_to(7), g)
        f2 = synthesize(SpectralField.random(7, rng), g)
        phase = np.exp(1j * 1.1)
        assert product_l2_norm(phase * f1, f2, g) == pytest.approx(
            product_l2_norm(f1, f2, g), rel=1e-14)

    def test_ratio_reproducible(self):
        g = product_grid(4, 4)
        a = projector_bilinear_ratio(4, 4, 10, 77, g)
        b = projector_bilinear_ratio(4, 4, 10, 77, g)
        assert a == b

    def test_structured_probe_dominates_zonal(self):
        g = product_grid(8, 8)
        zonal = product_l2_norm(synthesize(SpectralField.basis(8, 8, 0), g),
                                synthesize(SpectralField.basis(8, 8, 0), g), g)
        assert structured_pair_ratio(8, 8, g) >= zonal

    def test_degenerate_inputs_rejected(self):
        g = product_grid(4, 4)
        with pytest.raises(ConfigurationError):
            projector_bilinear_ratio(0, 4, 5, 0, g)
        with pytest.raises(ConfigurationError):
            projector_bilinear_ratio(4, 4, 0, 0, g)


class TestScalingFit:
    def test_exact_power_law(self):
        cells = [(n, n, float(n) ** 0.25) for n in (2, 4, 8, 16)]
        fit = scaling_fit(cells)
        assert fit.slope == pytest.approx(0.25, abs=1e-12)
        assert fit.residual <= 1e-12

    def test_constant_ratios(self):
        fit = scaling_fit([(2, 2, 0.5), (4, 4, 0.5), (8, 2, 0.5)])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_bucketing_takes_max(self):
        fit = scaling_fit([(2, 2, 0.1), (2, 4, 0.7), (4, 4, 0.2)])
        assert fit.buckets[2] == 0.7

    def test_degenerate_abscissa(self):
        with pytest.raises(ConfigurationError):
            scaling_fit([(4, 4, 1.0), (4, 8, 2.0)])


class TestScans:
    def test_bilinear_scan_deterministic(self):
        cfg = ScanConfig(n_list=[1, 2], l_list=[1, 2], trials=2, seed=42, sigma=S14)
        rows1, fit1 = run_bilinear_scan(cfg)
        rows2, fit2 = run_bilinear_scan(cfg)
        assert rows1 == rows2
        assert fit1 == fit2
        rows3, _ = run_bilinear_scan(ScanConfig(n_list=[1, 2], l_list=[1, 2],
                                                trials=2, seed=43, sigma=S14))
        assert rows3 != rows1

    def test_projector_scan_fit(self):
        rows, fit = run_projector_scan([(2, 2), (4, 4), (2, 4)], 5, 3)
        assert isinstance(fit, FitResult)
        assert set(fit.buckets) == {2, 4}
