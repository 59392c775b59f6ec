"""Time integration of the soliton-perturbation Zakharov system.

All unknowns are perturbations of the line soliton in the gauged frame, so
the zero state is an exact equilibrium:

    i u_t + Lap u - u = n u + Q n - Q^2 u
    n_t = lam^2 div v
    v_t - grad n = grad(|u|^2 + 2 Q Re u)

Two integrators are provided. ``strang`` splits off the linear Schrodinger
and acoustic groups (both propagated exactly per Fourier mode) and advances
the coupling terms with RK4. ``split_duhamel`` works with
n_pm = n +- i (lam w)^-1 n_t, w = |k|, and integrates the Duhamel form with an
integrating-factor RK4. The perturbed NLS limit equation has its own Strang
stepper.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .soliton import Background
from .spectral import Grid2D, fft2, ifft2, irfft2, rfft2

log = logging.getLogger(__name__)

INTEGRATORS = ("strang", "split_duhamel")

# dt * lam * kmax above this is rejected; the coupling substep and the
# splitting error are only controlled below it.
STABILITY_CONSTANT = 2.0

GROWTH_LIMIT = 10.0
_GROWTH_FLOOR = 1e-8


class NumericalInstability(RuntimeError):
    """Raised when a step produces non-finite values or blows up.

    ``last_state`` is the last state that passed the checks.
    """

    def __init__(self, message: str, t: float, last_state=None):
        super().__init__(f"t={t:.6g}: {message}")
        self.t = t
        self.last_state = last_state


@dataclass(frozen=True)
class SimParams:
    grid: Grid2D
    lam: float = 1.0
    dt: float = 1e-3
    T: float = 1.0
    integrator: str = "strang"
    dealias: bool = True

    def __post_init__(self) -> None:
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.T >= 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        cfl = self.dt * self.lam * self.grid.kmax
        if cfl > STABILITY_CONSTANT:
            raise ValueError(
                f"dt*lambda*kmax = {cfl:.3g} exceeds {STABILITY_CONSTANT}; reduce dt"
            )


@dataclass(frozen=True, eq=False)
class ZakharovState:
    grid: Grid2D
    t: float
    u: np.ndarray
    n: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        shp = self.grid.shape
        u = np.asarray(self.u, dtype=complex)
        n = np.asarray(self.n)
        v = np.asarray(self.v)
        if np.iscomplexobj(n) or np.iscomplexobj(v):
            raise ValueError("n and v must be real")
        if u.shape != shp or n.shape != shp or v.shape != (2,) + shp:
            raise ValueError("state arrays do not match the grid")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "n", n.astype(float, copy=False))
        object.__setattr__(self, "v", v.astype(float, copy=False))

    @classmethod
    def zeros(cls, grid: Grid2D, t: float = 0.0) -> "ZakharovState":
        return cls(grid, t, np.zeros(grid.shape, complex), np.zeros(grid.shape),
                   np.zeros((2,) + grid.shape))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.n))
                    and np.all(np.isfinite(self.v)))


@dataclass(frozen=True, eq=False)
class SplitState:
    """(u, n_plus, n_minus) plus the part of v invisible to the n_pm variables.

    ``v_rest`` holds the mean, the divergence-free part and the Nyquist
    modes of v; none of them evolve, so carrying them keeps the conversion
    to and from :class:`ZakharovState` lossless.
    """

    grid: Grid2D
    t: float
    u: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray
    v_rest: np.ndarray | None = field(default=None)

    @property
    def n(self) -> np.ndarray:
        return ((self.n_plus + self.n_minus) / 2).real


@dataclass
class Tendency:
    du: np.ndarray
    dn: np.ndarray
    dv: np.ndarray


# -- cached per-parameter operators ----------------------------------------


class _Model:
    def __init__(self, grid: Grid2D, lam: float, dealias: bool):
        self.grid = grid
        self.lam = lam
        self.dealias = dealias
        self.bg = Background(grid)
        g = grid
        self.mask = g.dealias_mask if dealias else np.ones(g.shape, bool)
        self.mask_r = g.dealias_mask_r if dealias else np.ones((g.nx, g.ny // 2 + 1), bool)
        kap = g.kodd_abs_r
        with np.errstate(invalid="ignore", divide="ignore"):
            inv = np.where(kap > 0, 1.0 / kap, 0.0)
        self.ex = g.kx_odd * inv
        self.ey = g.kyr_odd * inv
        self.kap_r = kap
        self.kap = g.kodd_abs
        with np.errstate(invalid="ignore", divide="ignore"):
            self.inv_kap = np.where(self.kap > 0, 1.0 / self.kap, 0.0)
        self._lin_cache: dict[float, tuple] = {}

    def _lin(self, h: float):
        got = self._lin_cache.get(h)
        if got is None:
            g = self.grid
            eu = np.exp(-1j * h * (g.k2 + 1.0))
            ph = self.lam * self.kap_r * h
            got = (eu, np.cos(ph), np.sin(ph))
            self._lin_cache[h] = got
        return got

    # linear groups: Schrodinger on u, acoustic on (n, v)
    def linear(self, u, n, v, h):
        eu, c, s = self._lin(h)
        u = ifft2(fft2(u) * eu)
        nh = rfft2(n)
        vh = rfft2(v)
        vpar = self.ex * vh[0] + self.ey * vh[1]
        nh2 = c * nh + 1j * self.lam * s * vpar
        dpar = (c - 1.0) * vpar + 1j / self.lam * s * nh
        vh[0] += self.ex * dpar
        vh[1] += self.ey * dpar
        shp = self.grid.shape
        return u, irfft2(nh2, shp), irfft2(vh, shp)

    def _du_coupling(self, u, n):
        Q, Q2 = self.bg.Q, self.bg.Q2
        prod = (n - Q2) * u + Q * n
        if self.dealias:
            prod = ifft2(fft2(prod) * self.mask)
        return -1j * prod

    def _source(self, u):
        """|u|^2 + 2 Q Re u (undealiased)."""
        return u.real ** 2 + u.imag ** 2 + 2.0 * self.bg.Q * u.real

    def _grad_source(self, N):
        Nh = rfft2(N)
        if self.dealias:
            Nh = Nh * self.mask_r
        g = self.grid
        return np.stack([irfft2(1j * g.kx_odd * Nh, g.shape), irfft2(1j * g.kyr_odd * Nh, g.shape)])

    def coupling(self, u, n, v, h):
        """RK4 over h for the coupling terms with n frozen (dn = 0 here)."""
        k1 = self._du_coupling(u, n)
        u2 = u + 0.5 * h * k1
        k2 = self._du_coupling(u2, n)
        u3 = u + 0.5 * h * k2
        k3 = self._du_coupling(u3, n)
        u4 = u + h * k3
        k4 = self._du_coupling(u4, n)
        # grad is linear: combine the four source evaluations before differentiating
        S = (self._source(u) + 2.0 * self._source(u2) + 2.0 * self._source(u3) + self._source(u4)) / 6.0
        u_new = u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        v_new = v + h * self._grad_source(S)
        return u_new, n, v_new

    def rhs(self, u, n, v):
        g = self.grid
        du = 1j * (ifft2(-g.k2 * fft2(u)) - u) + self._du_coupling(u, n)
        dn = self.lam ** 2 * g.div_real(v)
        dv = g.grad_real(n) + self._grad_source(self._source(u))
        return du, dn, dv

    # -- n_pm formulation, everything in spectral space --------------------

    def split_factors(self, h: float):
        key = ("split", h)
        got = self._lin_cache.get(key)
        if got is None:
            g = self.grid
            eu = np.exp(-1j * h * (g.k2 + 1.0))
            ep = np.exp(-1j * self.lam * self.kap * h)
            got = (eu, ep, np.conj(ep))
            self._lin_cache[key] = got
        return got

    def split_nonlinear(self, uh, nph, nmh):
        Q, Q2 = self.bg.Q, self.bg.Q2
        u = ifft2(uh)
        n = ifft2(0.5 * (nph + nmh)).real
        gu = -1j * fft2((n - Q2) * u + Q * n) * self.mask
        Nh = fft2(self._source(u)) * self.mask
        w = -1j * self.lam * self.kap * Nh
        return gu, w, -w


@lru_cache(maxsize=32)
def _model(grid: Grid2D, lam: float, dealias: bool) -> _Model:
    return _Model(grid, lam, dealias)


def model_for(params: SimParams) -> _Model:
    return _model(params.grid, float(params.lam), bool(params.dealias))


# -- public operations ------------------------------------------------------


def rhs(state: ZakharovState, params: SimParams) -> Tendency:
    """Tendencies (du, dn, dv) of the first-order system; products dealiased."""
    params.grid.check_same(state.grid)
    du, dn, dv = model_for(params).rhs(state.u, state.n, state.v)
    if not (np.all(np.isfinite(du)) and np.all(np.isfinite(dn)) and np.all(np.isfinite(dv))):
        raise NumericalInstability("non-finite tendency", state.t, state)
    return Tendency(du, dn, dv)


def _sq_norms(g: Grid2D, *arrays) -> float:
    return math.sqrt(sum(float(np.vdot(a, a).real) for a in arrays) * g.dA)


def _guard(prev_norm: float, new_norm: float, t: float, last_state) -> None:
    if not math.isfinite(new_norm):
        raise NumericalInstability("non-finite values", t, last_state)
    if new_norm > GROWTH_LIMIT * max(prev_norm, _GROWTH_FLOOR):
        raise NumericalInstability(
            f"norm grew from {prev_norm:.3e} to {new_norm:.3e} in one step", t, last_state
        )


def _strang_run(state: ZakharovState, params: SimParams, nsteps: int) -> ZakharovState:
    """``nsteps`` Strang steps with consecutive linear half steps fused."""
    if nsteps == 0:
        return state
    m = model_for(params)
    g = state.grid
    dt = params.dt
    u, n, v = state.u, state.n, state.v
    norm = _sq_norms(g, u, n, v)
    u, n, v = m.linear(u, n, v, 0.5 * dt)
    for k in range(nsteps):
        u, n, v = m.coupling(u, n, v, dt)
        h = dt if k < nsteps - 1 else 0.5 * dt
        u, n, v = m.linear(u, n, v, h)
        new = _sq_norms(g, u, n, v)
        _guard(norm, new, state.t + (k + 1) * dt, state)
        norm = new
    return ZakharovState(g, state.t + nsteps * dt, u, n, v)


def step_strang(state: ZakharovState, params: SimParams) -> ZakharovState:
    """One Strang step: half linear, RK4 coupling over dt, half linear."""
    params.grid.check_same(state.grid)
    return _strang_run(state, params, 1)


def to_split(state: ZakharovState, lam: float) -> SplitState:
    """n_pm = n +- i (lam w)^-1 n_t with n_t = lam^2 div v."""
    g = state.grid
    m = _model(g, float(lam), True)
    nh = fft2(state.n)
    vh = fft2(state.v)
    nth = lam ** 2 * 1j * (g.kx_odd * vh[0] + g.ky_odd * vh[1])
    corr = 1j * nth * m.inv_kap / lam
    nph, nmh = nh + corr, nh - corr
    v_grad = _grad_part(g, vh)
    v_rest = state.v - v_grad
    return SplitState(g, state.t, state.u.copy(), ifft2(nph), ifft2(nmh), v_rest)


def _grad_part(g: Grid2D, vh: np.ndarray) -> np.ndarray:
    k2 = g.kx_odd ** 2 + g.ky_odd ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(k2 > 0, 1.0 / k2, 0.0)
    par = (g.kx_odd * vh[0] + g.ky_odd * vh[1]) * w
    return np.stack([ifft2(g.kx_odd * par).real, ifft2(g.ky_odd * par).real])


def nt_from_split(s: SplitState, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Reconstruct (n, n_t) from the n_pm pair."""
    m = _model(s.grid, float(lam), True)
    nph, nmh = fft2(s.n_plus), fft2(s.n_minus)
    n = ifft2(0.5 * (nph + nmh)).real
    nt = ifft2((nph - nmh) * lam * m.kap / 2j).real
    return n, nt


def split_from_nt(grid: Grid2D, t: float, u: np.ndarray, n: np.ndarray, nt: np.ndarray,
                  lam: float, v_rest: np.ndarray | None = None) -> SplitState:
    m = _model(grid, float(lam), True)
    corr = 1j * fft2(nt) * m.inv_kap / lam
    nh = fft2(n)
    return SplitState(grid, t, np.asarray(u, complex), ifft2(nh + corr), ifft2(nh - corr), v_rest)


def from_split(s: SplitState, lam: float) -> ZakharovState:
    g = s.grid
    n, nt = nt_from_split(s, lam)
    nth = fft2(nt)
    k2 = g.kx_odd ** 2 + g.ky_odd ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(k2 > 0, 1.0 / k2, 0.0)
    phih = -nth * w / lam ** 2
    v = np.stack([ifft2(1j * g.kx_odd * phih).real, ifft2(1j * g.ky_odd * phih).real])
    if s.v_rest is not None:
        v = v + s.v_rest
    return ZakharovState(g, s.t, s.u.copy(), n, v)


def _split_run(state: SplitState, params: SimParams, nsteps: int) -> SplitState:
    """Integrating-factor RK4 on the Duhamel form of the n_pm system."""
    if nsteps == 0:
        return state
    m = model_for(params)
    g = state.grid
    h = params.dt
    eu2, ep2, em2 = m.split_factors(0.5 * h)
    eu1, ep1, em1 = m.split_factors(h)
    uh, ph, mh = fft2(state.u), fft2(state.n_plus), fft2(state.n_minus)
    norm = _sq_norms(g, state.u, state.n_plus, state.n_minus)
    for k in range(nsteps):
        a1 = m.split_nonlinear(uh, ph, mh)
        y2 = (eu2 * (uh + 0.5 * h * a1[0]), ep2 * (ph + 0.5 * h * a1[1]), em2 * (mh + 0.5 * h * a1[2]))
        a2 = m.split_nonlinear(*y2)
        y3 = (eu2 * uh + 0.5 * h * a2[0], ep2 * ph + 0.5 * h * a2[1], em2 * mh + 0.5 * h * a2[2])
        a3 = m.split_nonlinear(*y3)
        y4 = (eu1 * uh + h * eu2 * a3[0], ep1 * ph + h * ep2 * a3[1], em1 * mh + h * em2 * a3[2])
        a4 = m.split_nonlinear(*y4)
        uh = eu1 * uh + h / 6.0 * (eu1 * a1[0] + 2.0 * eu2 * (a2[0] + a3[0]) + a4[0])
        ph = ep1 * ph + h / 6.0 * (ep1 * a1[1] + 2.0 * ep2 * (a2[1] + a3[1]) + a4[1])
        mh = em1 * mh + h / 6.0 * (em1 * a1[2] + 2.0 * em2 * (a2[2] + a3[2]) + a4[2])
        # Parseval: physical norm from spectral coefficients
        new = _sq_norms(g, uh, ph, mh) / math.sqrt(g.nx * g.ny)
        _guard(norm, new, state.t + (k + 1) * h, state)
        norm = new
    return SplitState(g, state.t + nsteps * h, ifft2(uh), ifft2(ph), ifft2(mh), state.v_rest)


def step_split_duhamel(state: SplitState, params: SimParams) -> SplitState:
    """One integrating-factor RK4 step of the n_pm system.

    For lam != 1 the half-wave frequency is lam*|k| (n_pm built with
    (lam w)^-1); the lam = 1 case is the formulation proper.
    """
    params.grid.check_same(state.grid)
    return _split_run(state, params, 1)


# -- perturbed NLS ------------------------------------------------------------


class _PNLS:
    def __init__(self, grid: Grid2D, dealias: bool):
        self.grid = grid
        self.bg = Background(grid)
        self.Q3 = self.bg.Q ** 3
        self.mask = grid.dealias_mask if dealias else None
        self._lin: dict[float, np.ndarray] = {}

    def lin(self, h):
        e = self._lin.get(h)
        if e is None:
            e = self._lin[h] = np.exp(-1j * h * (self.grid.k2 + 1.0))
        return e

    def nonlinear(self, u):
        w = u + self.bg.Q
        r = (w.real ** 2 + w.imag ** 2) * w - self.Q3
        if self.mask is not None:
            r = ifft2(fft2(r) * self.mask)
        return 1j * r


@lru_cache(maxsize=8)
def _pnls(grid: Grid2D, dealias: bool) -> _PNLS:
    return _PNLS(grid, dealias)


def pnls_rhs(u: np.ndarray, grid: Grid2D, dealias: bool = True) -> np.ndarray:
    """u_t for i u_t - u + Lap u + |u+Q|^2 (u+Q) - Q^3 = 0."""
    p = _pnls(grid, dealias)
    return 1j * (grid.lap_complex(u) - u) + p.nonlinear(u)


def _pnls_run(u: np.ndarray, grid: Grid2D, dt: float, nsteps: int, dealias: bool, t0: float = 0.0):
    """Nonlinear half, exact linear, nonlinear half; the nonlinear halves of
    consecutive steps are merged into one RK4 substep over dt."""
    if nsteps == 0:
        return u
    p = _pnls(grid, dealias)
    norm = _sq_norms(grid, u)
    lin = p.lin(dt)

    def rk4(u, h):
        k1 = p.nonlinear(u)
        k2 = p.nonlinear(u + 0.5 * h * k1)
        k3 = p.nonlinear(u + 0.5 * h * k2)
        k4 = p.nonlinear(u + h * k3)
        return u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    u = rk4(u, 0.5 * dt)
    for k in range(nsteps):
        u = ifft2(fft2(u) * lin)
        u = rk4(u, dt if k < nsteps - 1 else 0.5 * dt)
        new = _sq_norms(grid, u)
        _guard(norm, new, t0 + (k + 1) * dt, None)
        norm = new
    return u


def step_pnls(u: np.ndarray, dt: float, grid: Grid2D, dealias: bool = True) -> np.ndarray:
    """One Strang step of the perturbed NLS: RK4 half steps on the cubic
    term around the exact factor e^{i dt (Lap - 1)}."""
    return _pnls_run(np.asarray(u, complex), grid, dt, 1, dealias)


# -- driver -------------------------------------------------------------------


def n_steps(t0: float, T: float, dt: float) -> int:
    """Number of fixed steps covering [t0, T]; T - t0 must be a multiple of dt."""
    span = T - t0
    if span < -1e-12:
        raise ValueError(f"final time {T} precedes start time {t0}")
    if span <= 0:
        return 0
    k = round(span / dt)
    if abs(k * dt - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError(f"T - t0 = {span} is not a multiple of dt = {dt}")
    return int(k)


def evolve(state, params: SimParams, observer: Callable | None = None, stride: int = 1,
           norms_k: tuple[float, ...] = (0.0, 1.0, 2.0)):
    """Fixed-step loop from ``state.t`` to ``params.T``.

    Records a :class:`~zsl.diagnostics.DiagnosticsRecord` at the start, every
    ``stride`` steps and at the end; ``observer(state, record)`` is called
    for each. Returns ``(final_state, records)``.
    """
    from .diagnostics import record

    if stride < 1:
        raise ValueError("stride must be >= 1")
    params.grid.check_same(state.grid)
    if isinstance(state, ZakharovState):
        if params.integrator != "strang":
            raise ValueError("ZakharovState requires the strang integrator")
        run = _strang_run
        as_z = lambda s: s  # noqa: E731
    elif isinstance(state, SplitState):
        if params.integrator != "split_duhamel":
            raise ValueError("SplitState requires the split_duhamel integrator")
        run = _split_run
        as_z = lambda s: from_split(s, params.lam)  # noqa: E731
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")

    total = n_steps(state.t, params.T, params.dt)
    t0 = state.t
    records = []

    def emit(s):
        rec = record(as_z(s), params, norms_k=norms_k)
        records.append(rec)
        if observer is not None:
            observer(s, rec)

    emit(state)
    done = 0
    while done < total:
        k = min(stride, total - done)
        state = run(state, params, k)
        done += k
        # recompute t from the step count so it does not accumulate rounding
        state = replace(state, t=t0 + done * params.dt)
        emit(state)
    return state, records


def evolve_pnls(u0: np.ndarray, grid: Grid2D, dt: float, T: float, dealias: bool = True,
                stride: int | None = None, observer: Callable | None = None) -> np.ndarray:
    """Advance the perturbed NLS from t = 0 to ``T``; ``observer(t, u)`` every ``stride``."""
    total = n_steps(0.0, T, dt)
    u = np.asarray(u0, complex)
    stride = stride or max(total, 1)
    if observer:
        observer(0.0, u)
    done = 0
    while done < total:
        k = min(stride, total - done)
        u = _pnls_run(u, grid, dt, k, dealias, t0=done * dt)
        done += k
        if observer:
            observer(done * dt, u)
    return u
