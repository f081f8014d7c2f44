import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from sphereshg.errors import ConfigurationError
from sphereshg.spectral import (
    SPHERE2,
    SpectralField,
    SpectrumModel,
    SphereGrid,
    analyze,
    bracket,
    build_grid,
    dyadic_blocks,
    dyadic_degrees,
    dyadic_project,
    eigenvalue,
    l2_inner,
    project_degree,
    sobolev_norm,
    synthesize,
)


def random_field(kmax, seed, decay=0.0):
    return SpectralField.random(kmax, np.random.default_rng(seed), decay=decay)


class TestSpectrumModel:
    def test_sphere_eigenvalues(self):
        assert eigenvalue(SpectrumModel("sphere", 2), 1) == 2
        assert eigenvalue(SpectrumModel("sphere", 3), 0) == 0
        assert eigenvalue(SPHERE2, 5) == 30

    def test_zoll_eigenvalues(self):
        zoll = SpectrumModel("zoll", z0=2, band_halfwidth=1.0)
        assert eigenvalue(zoll, 1) == pytest.approx(2.25, abs=0)
        assert eigenvalue(SpectrumModel("zoll", z0=0), 3) == 9

    @given(hst.integers(min_value=0, max_value=200),
           hst.sampled_from([SpectrumModel("sphere", 2), SpectrumModel("sphere", 4),
                             SpectrumModel("zoll", z0=3)]))
    def test_monotone(self, k, model):
        assert eigenvalue(model, k + 1) > eigenvalue(model, k)

    def test_negative_degree_rejected(self):
        with pytest.raises(ConfigurationError):
            eigenvalue(SPHERE2, -1)

    def test_bracket(self):
        assert bracket(0.0) == 1.0
        assert bracket(6.0) == pytest.approx(np.sqrt(37.0))


class TestGrid:
    def test_sizes_and_weights(self):
        g = build_grid(4)
        assert g.n_theta >= 9 and g.n_phi >= 17
        assert g.w.sum() == pytest.approx(2.0, abs=1e-13)

    def test_degree_two_exactness(self):
        # integral of cos^2(theta) sin(theta) dtheta dphi = 2 pi * 2/3
        g = build_grid(1)
        assert g.n_theta >= 3
        vals = np.broadcast_to(g.x[:, None] ** 2, (g.n_theta, g.n_phi))
        assert g.integrate(vals) == pytest.approx(4.0 * np.pi / 3.0, rel=1e-14)

    def test_invalid_band_limit(self):
        with pytest.raises(ConfigurationError):
            build_grid(0)

    def test_quad_degree_override(self):
        g = SphereGrid(10, quad_degree=24)
        assert 2 * g.n_theta - 1 >= 24
        assert g.n_phi >= 25
        with pytest.raises(ConfigurationError):
            SphereGrid(10, quad_degree=10)


class TestTransforms:
    def test_roundtrip_every_basis_harmonic_k32(self):
        kmax = 32
        g = build_grid(kmax)
        worst = 0.0
        for k in range(kmax + 1):
            for m in range(-k, k + 1):
                f = SpectralField.basis(kmax, k, m)
                back = analyze(synthesize(f, g), g)
                worst = max(worst, np.abs(back.coeffs - f.coeffs).max())
        assert worst <= 1e-10

    def test_constant_mode(self):
        g = build_grid(8)
        vals = synthesize(SpectralField.basis(4, 0, 0), g)
        assert np.abs(vals - 1.0 / np.sqrt(4 * np.pi)).max() <= 1e-14

    def test_zero_field(self):
        g = build_grid(8)
        assert np.abs(synthesize(SpectralField.zeros(8), g)).max() == 0.0

    def test_degree_one_closed_form(self):
        g = build_grid(6)
        vals = synthesize(SpectralField.basis(6, 1, 0), g)
        expect = np.sqrt(3.0 / (4 * np.pi)) * g.x[:, None]
        assert np.abs(vals - expect).max() <= 1e-13

    def test_analyze_recovers_random_field(self):
        g = build_grid(16)
        f = random_field(16, 11)
        back = analyze(synthesize(f, g), g)
        assert np.abs(back.coeffs - f.coeffs).max() <= 1e-10

    def test_analyze_constant(self):
        g = build_grid(8)
        vals = np.full((g.n_theta, g.n_phi), 1.0 / np.sqrt(4 * np.pi), dtype=complex)
        c = analyze(vals, g)
        assert c.coeffs[0, 8] == pytest.approx(1.0, abs=1e-12)
        c.coeffs[0, 8] = 0.0
        assert np.abs(c.coeffs).max() <= 1e-12

    def test_single_harmonic_recovery(self):
        g = build_grid(8)
        vals = synthesize(SpectralField.basis(8, 3, 2), g)
        c = analyze(vals, g)
        assert c.coeffs[3, 8 + 2] == pytest.approx(1.0, abs=1e-12)

    def test_band_limit_mismatch(self):
        g = build_grid(4)
        with pytest.raises(ConfigurationError):
            synthesize(random_field(8, 0), g)

    def test_conjugate_field_matches_pointwise_conjugate(self):
        g = build_grid(12)
        f = random_field(12, 5)
        lhs = synthesize(f.conjugate_field(), g)
        rhs = np.conj(synthesize(f, g))
        assert np.abs(lhs - rhs).max() <= 1e-12


class TestParseval:
    @given(hst.integers(min_value=0, max_value=1000))
    @settings(max_examples=20, deadline=None)
    def test_inner_product_matches_quadrature(self, seed):
        g = build_grid(8)
        f1 = random_field(8, seed)
        f2 = random_field(8, seed + 1)
        quad = g.integrate(np.conj(synthesize(f1, g)) * synthesize(f2, g))
        ip = l2_inner(f1, f2)
        assert abs(quad - ip) <= 1e-10 * max(1.0, abs(ip))

    def test_unit_mode_pairings(self):
        a = SpectralField.basis(4, 2, 1)
        b = SpectralField.basis(4, 3, -2)
        assert l2_inner(a, a) == pytest.approx(1.0)
        assert l2_inner(a, b) == 0.0

    def test_mismatch_raises(self):
        with pytest.raises(ConfigurationError):
            l2_inner(SpectralField.zeros(4), SpectralField.zeros(5))


class TestProjectors:
    def test_block_one_contains_first_two_degrees(self):
        assert list(dyadic_degrees(SPHERE2, 1, 16)) == [0, 1]

    def test_project_degree(self):
        f = random_field(8, 3)
        p = project_degree(f, 5)
        assert np.array_equal(p.coeffs[5], f.coeffs[5])
        p.coeffs[5] = 0
        assert np.abs(p.coeffs).max() == 0.0

    @given(hst.integers(min_value=0, max_value=500),
           hst.sampled_from([1, 2, 4, 8]))
    @settings(max_examples=25, deadline=None)
    def test_idempotent_and_orthogonal(self, seed, n):
        f = random_field(16, seed)
        p = dyadic_project(f, n)
        again = dyadic_project(p, n)
        assert np.abs(again.coeffs - p.coeffs).max() == 0.0
        other = dyadic_project(p, 2 * n)
        assert np.abs(other.coeffs).max() == 0.0

    def test_partition_of_identity(self):
        f = random_field(32, 9)
        total = SpectralField.zeros(32)
        for n, _ in dyadic_blocks(SPHERE2, 32).items():
            total = total + dyadic_project(f, n)
        assert np.abs(total.coeffs - f.coeffs).max() <= 1e-14

    def test_non_dyadic_rejected(self):
        with pytest.raises(ConfigurationError):
            dyadic_project(random_field(8, 0), 3)


class TestNorms:
    def test_s_zero_is_l2(self):
        f = random_field(12, 2)
        assert sobolev_norm(f, 0.0) == pytest.approx(f.l2_norm(), rel=1e-14)

    def test_single_mode_closed_form(self):
        f = SpectralField.basis(4, 2, 0)
        assert sobolev_norm(f, 2.0) == pytest.approx(np.sqrt(37.0), rel=1e-14)

    def test_zero_field(self):
        assert sobolev_norm(SpectralField.zeros(6), 3.7) == 0.0
