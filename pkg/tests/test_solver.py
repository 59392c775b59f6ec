import numpy as np
import pytest
from dataclasses import replace

from zsl.initial import InitialData
from zsl.soliton import Background
from zsl.solver import (
    NumericalInstability, SimParams, SplitState, ZakharovState, evolve, evolve_pnls, from_split,
    n_steps, nt_from_split, pnls_rhs, rhs, split_from_nt, step_pnls, step_split_duhamel,
    step_strang, to_split,
)
from zsl.spectral import Grid2D


def gaussian_state(g, amp=0.1, n_amp=0.05, seed=None):
    s = InitialData("gaussian", amplitude=amp, width=2.0, n_amplitude=n_amp).build(g)
    if seed is None:
        return s
    rng = np.random.default_rng(seed)
    bump = np.exp(-(g.X ** 2 + g.Y ** 2) / 6)
    v = np.stack([rng.normal() * bump, rng.normal() * np.roll(bump, 3, axis=1)])
    return ZakharovState(g, 0.0, s.u * np.exp(0.3j), s.n, 0.05 * v)


def h1_l2_distance(g, a: ZakharovState, b: ZakharovState):
    return float(np.hypot(g.hs_norm_complex(a.u - b.u, 1.0), g.l2(a.n - b.n)))


class TestParams:
    def test_validation(self, g32):
        with pytest.raises(ValueError):
            SimParams(g32, lam=-1)
        with pytest.raises(ValueError):
            SimParams(g32, dt=0)
        with pytest.raises(ValueError):
            SimParams(g32, T=-1)
        with pytest.raises(ValueError):
            SimParams(g32, integrator="euler")
        with pytest.raises(ValueError):
            SimParams(g32, lam=100.0, dt=0.1)

    def test_n_steps(self):
        assert n_steps(0.0, 1.0, 0.1) == 10
        assert n_steps(0.5, 0.5, 0.1) == 0
        with pytest.raises(ValueError):
            n_steps(0.0, 0.5, 0.3)
        with pytest.raises(ValueError):
            n_steps(1.0, 0.5, 0.1)


class TestRhs:
    def test_zero_state(self, g32):
        t = rhs(ZakharovState.zeros(g32), SimParams(g32))
        assert np.all(t.du == 0) and np.all(t.dn == 0) and np.all(t.dv == 0)

    def test_wave_only(self, g64):
        bg = Background(g64)
        n0 = 0.2 * np.exp(-(g64.X ** 2 + g64.Y ** 2) / 4)
        s = ZakharovState(g64, 0.0, np.zeros(g64.shape, complex), n0, np.zeros((2,) + g64.shape))
        t = rhs(s, SimParams(g64, dealias=False))
        np.testing.assert_allclose(t.du, -1j * bg.Q * n0, atol=1e-14)
        assert np.max(np.abs(t.dn)) == 0
        np.testing.assert_allclose(t.dv, g64.grad_real(n0), atol=1e-14)

    @pytest.mark.parametrize("dealias", [True, False])
    def test_manufactured_against_numpy_fft(self, g64, dealias):
        # second implementation with numpy.fft and explicit loops over terms
        g = g64
        s = gaussian_state(g, seed=3)
        lam = 1.7
        Q = Background(g).Q
        m = np.abs(np.fft.fftfreq(g.nx, 1 / g.nx))[:, None] <= g.nx / 3
        m = m & (np.abs(np.fft.fftfreq(g.ny, 1 / g.ny))[None, :] <= g.ny / 3)
        D = (lambda a: np.fft.ifft2(np.fft.fft2(a) * m)) if dealias else (lambda a: a)
        kx = 2 * np.pi / g.Lx * np.fft.fftfreq(g.nx, 1 / g.nx)[:, None]
        ky = 2 * np.pi / g.Ly * np.fft.fftfreq(g.ny, 1 / g.ny)[None, :]
        kxo, kyo = kx.copy(), ky.copy()
        kxo[g.nx // 2] = 0
        kyo[:, g.ny // 2] = 0
        d = lambda a, k: np.fft.ifft2(1j * k * np.fft.fft2(a))  # noqa: E731
        lap_u = np.fft.ifft2(-(kx ** 2 + ky ** 2) * np.fft.fft2(s.u))
        du = 1j * (lap_u - s.u) - 1j * D(s.n * s.u) - 1j * D(Q * s.n) + 1j * D(Q ** 2 * s.u)
        dn = lam ** 2 * (d(s.v[0], kxo) + d(s.v[1], kyo)).real
        src = D(np.abs(s.u) ** 2 + 2 * Q * s.u.real)
        dv = np.stack([d(s.n, kxo) + d(src, kxo), d(s.n, kyo) + d(src, kyo)]).real
        t = rhs(s, SimParams(g, lam=lam, dealias=dealias))
        np.testing.assert_allclose(t.du, du, atol=1e-12)
        np.testing.assert_allclose(t.dn, dn, atol=1e-12)
        np.testing.assert_allclose(t.dv, dv, atol=1e-12)


class TestStrang:
    def test_zero_is_fixed_point(self, g32):
        p = SimParams(g32, dt=0.01, T=1.0)
        out, recs = evolve(ZakharovState.zeros(g32), p, stride=10)
        assert np.max(np.abs(out.u)) == 0 and np.max(np.abs(out.n)) == 0
        assert all(r.energy == 0 for r in recs)

    def test_t_zero_returns_initial(self, g32):
        s = gaussian_state(g32)
        out, recs = evolve(s, SimParams(g32, T=0.0))
        assert out is s and len(recs) == 1

    def test_step_strang_matches_evolve(self, g32):
        s = gaussian_state(g32)
        p = SimParams(g32, dt=0.01, T=0.02)
        a = step_strang(step_strang(s, p), p)
        b, _ = evolve(s, p)
        np.testing.assert_allclose(a.u, b.u, atol=1e-14)

    def test_second_order_self_convergence(self, g64):
        s = gaussian_state(g64, seed=1)
        outs = [evolve(s, SimParams(g64, dt=dt, T=0.2), stride=1000)[0] for dt in (0.02, 0.01, 0.005)]
        e1 = h1_l2_distance(g64, outs[0], outs[1])
        e2 = h1_l2_distance(g64, outs[1], outs[2])
        assert 3.0 < e1 / e2 < 5.0

    def test_mean_n_conserved(self, g64):
        s = gaussian_state(g64, seed=2)
        out, _ = evolve(s, SimParams(g64, dt=0.01, T=0.5), stride=100)
        assert abs(out.n.mean() - s.n.mean()) < 1e-12

    def test_t_is_exact_multiple(self, g32):
        out, recs = evolve(gaussian_state(g32), SimParams(g32, dt=0.1, T=0.7), stride=3)
        assert out.t == pytest.approx(0.7, abs=1e-15)
        ts = [r.t for r in recs]
        assert all(b > a for a, b in zip(ts, ts[1:]))

    def test_instability_detected(self, g32):
        s = InitialData("gaussian", amplitude=10, width=1.0).build(g32)
        with pytest.raises(NumericalInstability) as ei:
            evolve(s, SimParams(g32, dt=0.2, T=2.0), stride=5)
        good = ei.value.last_state
        assert isinstance(good, ZakharovState) and good.is_finite()
        assert good.t < ei.value.t

    def test_deterministic(self, g32):
        s = gaussian_state(g32, seed=4)
        p = SimParams(g32, dt=0.01, T=0.1)
        a, _ = evolve(s, p)
        b, _ = evolve(s, p)
        assert a.u.tobytes() == b.u.tobytes() and a.v.tobytes() == b.v.tobytes()


class TestSplit:
    def test_round_trip(self, g64):
        s = gaussian_state(g64, seed=5)
        back = from_split(to_split(s, 1.0), 1.0)
        np.testing.assert_allclose(back.u, s.u, atol=1e-12)
        np.testing.assert_allclose(back.n, s.n, atol=1e-10)
        np.testing.assert_allclose(back.v, s.v, atol=1e-10)

    def test_nt_round_trip(self, g64):
        s = gaussian_state(g64, seed=6)
        sp = to_split(s, 2.0)
        n, nt = nt_from_split(sp, 2.0)
        sp2 = split_from_nt(g64, 0.0, s.u, n, nt, 2.0)
        np.testing.assert_allclose(sp2.n_plus, sp.n_plus, atol=1e-10)
        np.testing.assert_allclose(sp2.n_minus, sp.n_minus, atol=1e-10)
        np.testing.assert_allclose(np.abs(sp.n.imag if np.iscomplexobj(sp.n) else 0), 0, atol=1e-10)

    def test_conjugacy_preserved(self, g32):
        sp = to_split(gaussian_state(g32, seed=7), 1.0)
        np.testing.assert_allclose(sp.n_minus, np.conj(sp.n_plus), atol=1e-12)
        p = SimParams(g32, dt=0.01, T=1.0, integrator="split_duhamel")
        out, _ = evolve(sp, p, stride=100)
        assert np.max(np.abs(out.n_minus - np.conj(out.n_plus))) < 1e-10

    def test_zero_fixed_point(self, g32):
        sp = to_split(ZakharovState.zeros(g32), 1.0)
        p = SimParams(g32, dt=0.01, T=0.05, integrator="split_duhamel")
        out = step_split_duhamel(sp, p)
        assert np.max(np.abs(out.u)) == 0 and np.max(np.abs(out.n_plus)) == 0

    def test_agrees_with_strang(self, g64):
        s = gaussian_state(g64, seed=8)
        a, _ = evolve(s, SimParams(g64, dt=0.002, T=0.2), stride=1000)
        b, _ = evolve(to_split(s, 1.0), SimParams(g64, dt=0.002, T=0.2, integrator="split_duhamel"),
                      stride=1000)
        assert h1_l2_distance(g64, a, from_split(b, 1.0)) < 1e-5

    def test_type_mismatch(self, g32):
        with pytest.raises(ValueError):
            evolve(ZakharovState.zeros(g32), SimParams(g32, integrator="split_duhamel"))
        with pytest.raises(ValueError):
            evolve(to_split(ZakharovState.zeros(g32), 1.0), SimParams(g32))


class TestPNLS:
    def test_zero_stays_zero(self, g32):
        u = evolve_pnls(np.zeros(g32.shape, complex), g32, 0.01, 1.0)
        assert np.max(np.abs(u)) < 1e-13
        assert np.max(np.abs(pnls_rhs(np.zeros(g32.shape, complex), g32))) < 1e-13

    def test_second_order(self, g64):
        u0 = 0.1 * np.exp(-(g64.X ** 2 + g64.Y ** 2) / 4) + 0j
        us = [evolve_pnls(u0, g64, dt, 0.2) for dt in (0.02, 0.01, 0.005)]
        e1 = g64.hs_norm_complex(us[0] - us[1], 1)
        e2 = g64.hs_norm_complex(us[1] - us[2], 1)
        assert 3.0 < e1 / e2 < 5.0

    def test_step_matches_run(self, g32):
        u0 = 0.1 * np.exp(-(g32.X ** 2 + g32.Y ** 2) / 4) + 0j
        a = step_pnls(step_pnls(u0, 0.01, g32), 0.01, g32)
        b = evolve_pnls(u0, g32, 0.01, 0.02)
        np.testing.assert_allclose(a, b, atol=1e-14)
