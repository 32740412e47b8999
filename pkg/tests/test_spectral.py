"""Grid, transform, multiplier, antiderivative and norm contracts."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgwave.errors import ConfigurationError, DomainError
from cgwave.spectral import (RealField, antiderivative_x2, apply_multiplier,
                             inner, integrate, inverse_transform, make_grid,
                             read_wsf1, sobolev_norm, sobolev_norms, transform,
                             translate, write_wsf1, x1_zero_fraction)
from conftest import band_limited


class TestGrid:
    def test_lattice_spacing(self):
        g = make_grid(64, 64, 20, 20, 2 / 3)
        assert g.k1[1] == pytest.approx(np.pi / 20, rel=1e-15)
        assert g.k2[1] == pytest.approx(np.pi / 20, rel=1e-15)

    def test_integer_lattice_at_pi(self):
        g = make_grid(8, 8, np.pi, np.pi, 1.0)
        assert np.allclose(sorted(g.k1), [-4, -3, -2, -1, 0, 1, 2, 3])

    def test_dealias_mask_cut(self):
        g = make_grid(64, 64, 20, 20, 2 / 3)
        m = np.fft.fftfreq(64, 1 / 64)
        kept = g.dealias_mask[0, :]
        assert np.all(kept[np.abs(m) <= 21])
        assert not np.any(kept[np.abs(m) > 21])

    @pytest.mark.parametrize("bad", [(63, 64), (64, 48), (4, 64)])
    def test_rejects_bad_sizes(self, bad):
        with pytest.raises(ConfigurationError):
            make_grid(bad[0], bad[1], 1.0, 1.0)

    def test_rejects_bad_lengths(self):
        with pytest.raises(ConfigurationError):
            make_grid(8, 8, -1.0, 1.0)
        with pytest.raises(ConfigurationError):
            make_grid(8, 8, 1.0, 1.0, dealias_fraction=0.0)


class TestTransform:
    def test_constant_field(self, grid_pi):
        sf = transform(RealField(grid_pi, np.ones(grid_pi.shape)))
        assert sf.coeffs[0, 0] == pytest.approx(1.0)
        off = sf.coeffs.copy()
        off[0, 0] = 0.0
        assert np.max(np.abs(off)) < 1e-14

    def test_single_mode_two_coefficients(self, grid_pi):
        X, _ = grid_pi.meshgrid()
        sf = transform(RealField(grid_pi, np.cos(3 * X)))
        nonzero = np.argwhere(np.abs(sf.coeffs) > 1e-12)
        assert len(nonzero) == 2
        vals = sf.coeffs[np.abs(sf.coeffs) > 1e-12]
        assert np.allclose(np.abs(vals), 0.5)
        assert np.allclose(vals[0], np.conj(vals[1]))

    def test_round_trip(self, grid_pi, rng):
        f = band_limited(grid_pi, rng, frac=0.9)
        back = inverse_transform(transform(f))
        assert np.max(np.abs(back.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))

    def test_parseval(self, grid_pi, rng):
        f = band_limited(grid_pi, rng, frac=0.8)
        phys = inner(f, f)
        spec = grid_pi.area * np.sum(np.abs(transform(f).coeffs) ** 2)
        assert phys == pytest.approx(spec, rel=1e-12)

    def test_non_hermitian_rejected(self, grid_pi):
        c = np.zeros(grid_pi.shape, dtype=complex)
        c[0, 1] = 1.0  # no conjugate partner
        from cgwave.spectral import SpectralField
        with pytest.raises(DomainError):
            inverse_transform(SpectralField(grid_pi, c))


class TestMultiplier:
    def test_identity(self, grid_pi, rng):
        f = band_limited(grid_pi, rng)
        out = apply_multiplier(lambda k1, k2: np.ones_like(k1), f)
        assert np.allclose(out.values, f.values, atol=1e-13)

    def test_laplacian_eigenfunction(self, grid_pi):
        X, _ = grid_pi.meshgrid()
        f = RealField(grid_pi, np.sin(X))
        out = apply_multiplier(lambda k1, k2: k1**2 + k2**2, f)
        assert np.max(np.abs(out.values - np.sin(X))) < 1e-12

    def test_dno_symbol_value(self, grid_pi):
        # extended-precision oracle: tanh(1) = 0.7615941559557649
        X, _ = grid_pi.meshgrid()
        f = RealField(grid_pi, np.cos(X))
        kk = lambda k1, k2: np.sqrt(k1**2 + k2**2)
        out = apply_multiplier(lambda k1, k2: kk(k1, k2) * np.tanh(kk(k1, k2)), f)
        assert np.max(np.abs(out.values - 0.7615941559557649 * np.cos(X))) < 1e-12

    def test_composition(self, grid_pi, rng):
        f = band_limited(grid_pi, rng)
        s1 = lambda k1, k2: 1.0 + k1**2
        s2 = lambda k1, k2: np.cos(k2)
        a = apply_multiplier(s1, apply_multiplier(s2, f))
        b = apply_multiplier(lambda k1, k2: s1(k1, k2) * s2(k1, k2), f)
        scale = np.max(np.abs(b.values)) + 1e-300
        assert np.max(np.abs(a.values - b.values)) <= 1e-12 * scale

    def test_nonfinite_symbol_names_k(self, grid_pi, rng):
        f = band_limited(grid_pi, rng)
        with pytest.raises(DomainError, match="k ="):
            apply_multiplier(lambda k1, k2: 1.0 / k1, f)

    def test_translation_equivariance(self, grid_pi, rng):
        f = band_limited(grid_pi, rng)
        sym = lambda k1, k2: np.tanh(np.sqrt(k1**2 + k2**2))
        shifted_then = apply_multiplier(sym, RealField(grid_pi, np.roll(f.values, 1, axis=1)))
        then_shifted = np.roll(apply_multiplier(sym, f).values, 1, axis=1)
        assert np.max(np.abs(shifted_then.values - then_shifted)) < 1e-12


class TestAntiderivative:
    def test_inverse_pair(self, grid_pi, rng):
        bump = band_limited(grid_pi, rng, frac=0.2, zero_mean=True)
        d2 = apply_multiplier(lambda k1, k2: -(k1**2), bump)  # d_x^2
        back = antiderivative_x2(d2)
        from cgwave.spectral import project_x_subspace
        target = project_x_subspace(bump)
        assert np.max(np.abs(back.values - target.values)) < 1e-10 * (np.max(np.abs(target.values)) + 1e-300)

    def test_sine(self, grid_pi):
        X, _ = grid_pi.meshgrid()
        out = antiderivative_x2(RealField(grid_pi, np.sin(X)))
        assert np.max(np.abs(out.values + np.sin(X))) < 1e-12

    def test_pure_x2_rejected(self, grid_pi):
        _, Y = grid_pi.meshgrid()
        with pytest.raises(DomainError):
            antiderivative_x2(RealField(grid_pi, np.cos(Y)))

    def test_second_derivative_recovers(self, grid_pi, rng):
        f = band_limited(grid_pi, rng, frac=0.3, zero_mean=True)
        from cgwave.spectral import project_x_subspace
        fx = project_x_subspace(f)
        anti = antiderivative_x2(fx)
        back = apply_multiplier(lambda k1, k2: -(k1**2), anti)
        assert np.max(np.abs(back.values - fx.values)) <= 1e-10 * np.max(np.abs(fx.values))


class TestSobolev:
    def test_constant_star_norm_vanishes(self, grid_pi):
        f = RealField(grid_pi, 2.5 * np.ones(grid_pi.shape))
        assert sobolev_norms(f, "Hhalf_star") == pytest.approx(0.0, abs=1e-14)
        assert sobolev_norms(f, "L2") == pytest.approx(2.5**2 * grid_pi.area, rel=1e-13)

    def test_single_mode_half_star(self, grid_pi):
        # (1+1)^{-1/2} * 1 * (two coefficients of 1/2): area * 2^{-1/2} / 2
        X, _ = grid_pi.meshgrid()
        f = RealField(grid_pi, np.cos(X))
        expected = grid_pi.area * 0.5 * 2.0 ** -0.5
        assert sobolev_norms(f, "Hhalf_star") == pytest.approx(expected, rel=1e-12)

    def test_duality(self, grid_pi, rng):
        for _ in range(8):
            w = band_limited(grid_pi, rng, frac=0.4, zero_mean=True)
            xi = band_limited(grid_pi, rng, frac=0.4, zero_mean=True)
            lhs = abs(inner(w, xi))
            rhs = sobolev_norm(w, "Hminushalf_star") * sobolev_norm(xi, "Hhalf_star")
            assert lhs <= rhs * (1 + 1e-12)

    def test_h1_parseval(self, grid_pi, rng):
        f = band_limited(grid_pi, rng, frac=0.5)
        from cgwave.spectral import dx, dy
        direct = inner(f, f) + inner(dx(f), dx(f)) + inner(dy(f), dy(f))
        assert sobolev_norms(f, "H1") == pytest.approx(direct, rel=1e-12)


class TestWSF1:
    def test_round_trip(self, grid_pi, rng, tmp_path):
        f = band_limited(grid_pi, rng)
        p = tmp_path / "field.wsf1"
        write_wsf1(f, p)
        back = read_wsf1(p)
        assert back.grid.nx == 64 and back.grid.Lx == pytest.approx(np.pi)
        assert np.array_equal(back.values, f.values)

    def test_header_layout(self, grid_pi, tmp_path):
        f = RealField(grid_pi, np.zeros(grid_pi.shape))
        p = tmp_path / "z.wsf1"
        write_wsf1(f, p)
        raw = p.read_bytes()
        head = raw.split(b"\n", 1)[0].split()
        assert head[0] == b"WSF1" and head[1] == b"64"

    def test_truncated_payload(self, grid_pi, tmp_path):
        p = tmp_path / "bad.wsf1"
        p.write_bytes(b"WSF1 64 64 3.14 3.14\n" + b"\x00" * 100)
        with pytest.raises(ConfigurationError, match="offset"):
            read_wsf1(p)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-3, 3), shift=st.integers(0, 63))
def test_translate_matches_roll(a, shift):
    g = make_grid(64, 64, np.pi, np.pi)
    X, Y = g.meshgrid()
    f = RealField(g, np.cos(X + 2 * Y) + a * np.sin(2 * X))
    dxcell = 2 * g.Lx / g.nx
    out = translate(f, shift * dxcell, 0.0)
    assert np.max(np.abs(out.values - np.roll(f.values, shift, axis=1))) < 1e-10
