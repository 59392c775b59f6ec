"""Conserved energy and norm monitors."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .solver import SimParams, ZakharovState, model_for
from .spectral import Grid2D, fft2, rfft2


def _kinetic(g: Grid2D, u: np.ndarray) -> float:
    """int |grad u|^2 through Parseval with the same |k|^2 as the Laplacian."""
    uh = fft2(u)
    return float(np.sum(g.k2 * np.abs(uh) ** 2) * g.area / (g.nx * g.ny) ** 2)


def energy(state: ZakharovState, params: SimParams) -> float:
    """Discrete energy of the perturbation system.

    int |grad u|^2 + |u|^2 + n^2/2 + lam^2 |v|^2/2 - Q^2 |u|^2
        + n (|u|^2 + 2 Q Re u)
    """
    g = state.grid
    g.check_same(params.grid)
    Q = model_for(params).bg.Q
    u, n, v = state.u, state.n, state.v
    au2 = u.real ** 2 + u.imag ** 2
    density = (
        au2
        + 0.5 * n ** 2
        + 0.5 * params.lam ** 2 * (v[0] ** 2 + v[1] ** 2)
        - Q ** 2 * au2
        + n * (au2 + 2.0 * Q * u.real)
    )
    return _kinetic(g, u) + g.integrate(density)


def constraint_residual(state: ZakharovState, Q: np.ndarray) -> float:
    """L2 norm of n + |u|^2 + 2 Q Re u."""
    u = state.u
    return state.grid.l2(state.n + u.real ** 2 + u.imag ** 2 + 2.0 * Q * u.real)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float
    u_hk: dict[float, float] = field(default_factory=dict)
    n_l2: float = 0.0
    v_l2: float = 0.0
    nt_hm1: float = 0.0
    perturbation: float = 0.0
    constraint: float = 0.0

    def columns(self) -> list[str]:
        return (["t", "energy"] + [f"u_h{_fmt_k(k)}" for k in self.u_hk]
                + ["n_l2", "v_l2", "nt_hm1", "perturbation", "constraint"])

    def values(self) -> list[float]:
        return ([self.t, self.energy] + list(self.u_hk.values())
                + [self.n_l2, self.v_l2, self.nt_hm1, self.perturbation, self.constraint])


def _fmt_k(k: float) -> str:
    return str(int(k)) if float(k).is_integer() else repr(float(k))


def record(state: ZakharovState, params: SimParams,
           norms_k: Sequence[float] = (0.0, 1.0, 2.0)) -> DiagnosticsRecord:
    g = state.grid
    Q = model_for(params).bg.Q
    uh = fft2(state.u)
    scale = math.sqrt(g.area) / (g.nx * g.ny)
    power = np.abs(uh) ** 2
    hk = {float(k): float(np.sqrt(np.sum((1.0 + g.k2) ** k * power)) * scale) for k in norms_k}
    # n_t = lam^2 div v, reported in H^-1
    vh = rfft2(state.v)
    nth = params.lam ** 2 * 1j * (g.kx_odd * vh[0] + g.kyr_odd * vh[1])
    w = np.full(nth.shape, 2.0)
    w[:, 0] = 1.0
    if g.ny % 2 == 0:
        w[:, -1] = 1.0
    nt_hm1 = float(np.sqrt(np.sum(w * np.abs(nth) ** 2 / (1.0 + g.k2r)))) * scale
    n_l2 = g.l2(state.n)
    u_l2 = g.l2(state.u)
    return DiagnosticsRecord(
        t=float(state.t),
        energy=energy(state, params),
        u_hk=hk,
        n_l2=n_l2,
        v_l2=g.l2(state.v),
        nt_hm1=nt_hm1,
        perturbation=math.hypot(u_l2, n_l2),
        constraint=constraint_residual(state, Q),
    )


def energy_drift(records: Iterable[DiagnosticsRecord]) -> float:
    """max_t |E(t) - E(0)| / max(1, |E(0)|)."""
    recs = list(records)
    e0 = recs[0].energy
    return max(abs(r.energy - e0) for r in recs) / max(1.0, abs(e0))


def format_float(x: float) -> str:
    """17 significant digits, independent of locale."""
    return format(float(x), ".17g")


def records_to_csv(records: Sequence[DiagnosticsRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if records:
        w.writerow(records[0].columns())
        for r in records:
            w.writerow([format_float(x) for x in r.values()])
    return buf.getvalue()


def write_csv(records: Sequence[DiagnosticsRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))


# -- perturbed NLS invariants ------------------------------------------------


def pnls_mass(u: np.ndarray, grid: Grid2D, Q: np.ndarray) -> float:
    """int |u + Q|^2 - Q^2 on the box."""
    return grid.integrate(u.real ** 2 + u.imag ** 2 + 2.0 * Q * u.real)


def pnls_energy(u: np.ndarray, grid: Grid2D, Q: np.ndarray) -> float:
    """Hamiltonian of the perturbed NLS relative to the soliton:

    int |grad u|^2 + |u|^2 - (|u+Q|^4 - Q^4)/2 + 2 Q^3 Re u
    """
    w2 = (u.real + Q) ** 2 + u.imag ** 2
    dens = u.real ** 2 + u.imag ** 2 - 0.5 * (w2 ** 2 - Q ** 4) + 2.0 * Q ** 3 * u.real
    return _kinetic(grid, u) + grid.integrate(dens)
