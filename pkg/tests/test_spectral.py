import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from zsl.spectral import (
    Field, Grid2D, ReprError, dealias, div, fft2, grad, inv_lap_grad, inv_omega, laplacian,
    l2_norm, omega, sobolev_norm, to_physical, to_spectral,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def rand_field(grid, seed, real=True):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.shape)
    if not real:
        v = v + 1j * rng.standard_normal(grid.shape)
    return Field(grid, v, real=real)


class TestGrid:
    def test_spacing_and_wavenumbers(self):
        g = Grid2D(16, 8, 4.0, 2.0)
        assert g.dx == 4.0 / 16 and g.dy == 2.0 / 8
        m = np.round(g.kx[:, 0] * g.Lx / (2 * np.pi))
        assert sorted(m) == list(range(-8, 8))
        assert g.kx_odd[8, 0] == 0.0 and g.kx[8, 0] == -np.pi / g.dx

    def test_grid_symmetric_about_origin(self):
        g = Grid2D(32, 32)
        x = g.x
        np.testing.assert_array_equal(x[1:], -x[1:][::-1])

    @pytest.mark.parametrize("nx, ny", [(7, 8), (8, 9), (6, 8)])
    def test_rejects_odd_or_small(self, nx, ny):
        with pytest.raises(ValueError):
            Grid2D(nx, ny)


class TestTransforms:
    def test_constant_field(self, g64):
        f = Field(g64, np.ones(g64.shape))
        fh = to_spectral(f).values
        assert fh[0, 0] == pytest.approx(g64.nx * g64.ny)
        fh[0, 0] = 0
        assert np.max(np.abs(fh)) < 1e-9

    def test_single_harmonic(self, g64):
        f = Field.from_function(g64, lambda X, Y: np.cos(2 * np.pi * X / g64.Lx))
        fh = np.abs(to_spectral(f).values) / (g64.nx * g64.ny)
        assert fh[1, 0] == pytest.approx(0.5) and fh[-1, 0] == pytest.approx(0.5)
        fh[1, 0] = fh[-1, 0] = 0
        assert fh.max() < 1e-13

    def test_round_trip_and_hermitian(self, g64):
        f = rand_field(g64, 1)
        fh = to_spectral(f).values
        herm = np.conj(fh[(-np.arange(g64.nx)) % g64.nx][:, (-np.arange(g64.ny)) % g64.ny])
        assert np.max(np.abs(fh - herm)) <= 1e-12 * np.max(np.abs(fh))
        back = to_physical(to_spectral(f))
        assert back.values.dtype == float
        np.testing.assert_allclose(back.values, f.values, atol=1e-12)

    def test_wrong_representation(self, g64):
        f = rand_field(g64, 2)
        with pytest.raises(ReprError):
            to_physical(f)
        with pytest.raises(ReprError):
            to_spectral(to_spectral(f))
        with pytest.raises(ReprError):
            dealias(f)

    def test_real_field_rejects_complex_storage(self, g64):
        with pytest.raises(ValueError):
            Field(g64, np.ones(g64.shape, complex), real=True)

    def test_nonfinite_rejected(self, g64):
        v = np.zeros(g64.shape)
        v[3, 3] = np.nan
        with pytest.raises(FloatingPointError):
            Field(g64, v)

    @given(arrays(float, (16, 8), elements=finite))
    def test_parseval(self, vals):
        g = Grid2D(16, 8, 3.0, 5.0)
        f = Field(g, vals)
        direct = math.sqrt(np.sum(vals ** 2) * g.dA)
        assert sobolev_norm(f, 0.0) == pytest.approx(direct, rel=1e-12, abs=1e-12)
        assert l2_norm(to_spectral(f)) == pytest.approx(direct, rel=1e-12, abs=1e-12)


class TestMultipliers:
    def test_omega_plane_wave(self):
        g = Grid2D(16, 16, 2 * np.pi, 2 * np.pi)
        f = Field.from_function(g, lambda X, Y: np.exp(1j * (3 * X + 4 * Y)))
        np.testing.assert_allclose(omega(f).values, 5 * f.values, atol=1e-12)

    def test_inv_omega_constant(self, g64):
        f = Field(g64, np.full(g64.shape, 3.0))
        assert np.max(np.abs(inv_omega(f).values)) == 0.0

    @given(st.integers(0, 2 ** 31))
    def test_omega_inv_omega(self, seed):
        g = Grid2D(16, 16)
        f = rand_field(g, seed)
        out = omega(inv_omega(f)).values
        np.testing.assert_allclose(out, f.values - f.values.mean(), atol=1e-12)

    def test_laplacian_of_mode(self, g64):
        k = 2 * np.pi / g64.Lx * 3
        f = Field.from_function(g64, lambda X, Y: np.sin(k * X))
        np.testing.assert_allclose(laplacian(f).values, -k * k * f.values, atol=1e-12)

    def test_grad_div_and_inverse(self, g64):
        f = Field.from_function(g64, lambda X, Y: np.exp(-(X ** 2 + Y ** 2) / 8))
        gf = grad(f)
        assert gf.rank == "vector2"
        exact = -2 * g64.X / 8 * f.values
        np.testing.assert_allclose(gf.values[0], exact, atol=1e-10)
        # Lap^-1 grad (div grad f) == grad f
        np.testing.assert_allclose(inv_lap_grad(div(gf)).values, gf.values, atol=1e-10)
        with pytest.raises(ValueError):
            grad(gf)
        with pytest.raises(ValueError):
            div(f)


class TestDealias:
    def test_retained_mode(self, g64):
        v = np.zeros(g64.shape, complex)
        v[1, 1] = 3.0 - 1.0j
        fh = Field(g64, v, "spectral", real=False)
        np.testing.assert_array_equal(dealias(fh).values, fh.values)

    def test_nyquist_removed(self, g64):
        f = Field(g64, (-1.0) ** np.arange(g64.nx)[:, None] * np.ones(g64.shape))
        assert np.max(np.abs(dealias(to_spectral(f)).values)) == 0.0

    @given(st.integers(0, 2 ** 31))
    def test_idempotent(self, seed):
        fh = to_spectral(rand_field(Grid2D(24, 24), seed))
        once = dealias(fh)
        np.testing.assert_array_equal(dealias(once).values, once.values)

    def test_band_is_two_thirds(self):
        g = Grid2D(12, 12)
        m = np.round(g.kx[:, 0] * g.Lx / (2 * np.pi)).astype(int)
        kept = sorted(m[g.dealias_mask[:, 0]])
        assert kept == [-4, -3, -2, -1, 0, 1, 2, 3, 4]


class TestSobolev:
    def test_zero(self, g64):
        assert sobolev_norm(Field(g64, np.zeros(g64.shape)), 3.5) == 0.0

    @pytest.mark.parametrize("s", [-1.0, 0.0, 1.0, 2.5])
    def test_constant(self, g64, s):
        f = Field(g64, np.full(g64.shape, 2.0))
        assert sobolev_norm(f, s) == pytest.approx(2.0 * math.sqrt(g64.area), rel=1e-12)

    def test_single_mode(self, g64):
        k = 2 * np.pi / g64.Lx
        vals = np.exp(1j * k * g64.X) / math.sqrt(g64.area)
        f = Field(g64, vals, real=False)
        assert sobolev_norm(f, 0.0) == pytest.approx(1.0, rel=1e-12)
        assert sobolev_norm(f, 1.0) == pytest.approx(math.sqrt(1 + k * k), rel=1e-12)
