"""Subsonic-limit experiment: the lambda-family against the perturbed NLS.

As lambda grows the wave equation relaxes onto n = -|u|^2 - 2 Q Re u and the
Schrodinger component approaches the perturbed NLS solution. The sweep runs
one Zakharov simulation per lambda (dt = dt0/lambda) and one NLS run, and
reports at the final time

    e_constraint = ||n + |u|^2 + 2 Q Re u||_2
    e_u          = ||u_lambda - u_nls||_H1
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import constraint_residual
from .initial import InitialData
from .soliton import Background
from .solver import NumericalInstability, SimParams, ZakharovState, evolve, evolve_pnls
from .spectral import Grid2D

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepConfig:
    grid: Grid2D
    lambdas: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    initial: InitialData = field(default_factory=lambda: InitialData("prepared-gaussian", amplitude=0.1))
    T: float = 0.5
    dt0: float = 4e-3
    pnls_dt: float | None = None
    dealias: bool = True
    control: bool = True

    def __post_init__(self) -> None:
        lams = tuple(float(x) for x in self.lambdas)
        if not lams or any(x <= 0 for x in lams):
            raise ValueError("lambdas must be positive")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("lambdas must be strictly increasing")
        object.__setattr__(self, "lambdas", lams)

    def dt_for(self, lam: float) -> float:
        return self.dt0 / lam

    @property
    def nls_dt(self) -> float:
        return self.pnls_dt if self.pnls_dt is not None else self.dt_for(self.lambdas[-1])


@dataclass
class MemberResult:
    lam: float
    dt: float
    e_constraint: float = math.nan
    e_u: float = math.nan
    failed: bool = False
    message: str = ""


@dataclass
class SweepReport:
    members: list[MemberResult]
    control_lambda: float | None = None
    control_e_u: float = math.nan

    @property
    def scheme_fraction(self) -> float:
        """|e_u(dt) - e_u(dt/2)| / e_u(dt) for the control member (NaN if absent)."""
        if self.control_lambda is None:
            return math.nan
        base = next(m.e_u for m in self.members if m.lam == self.control_lambda)
        return abs(base - self.control_e_u) / base if base > 0 else math.nan

    @property
    def lambdas(self) -> list[float]:
        return [m.lam for m in self.members]

    @property
    def e_constraint(self) -> list[float]:
        return [m.e_constraint for m in self.members]

    @property
    def e_u(self) -> list[float]:
        return [m.e_u for m in self.members]

    def ratios(self, key: str = "e_constraint") -> list[float]:
        vals = getattr(self, key)
        return [a / b if b > 0 else math.inf for a, b in zip(vals, vals[1:])]

    def constraint_monotone(self, min_ratio: float = 1.3) -> bool:
        r = self.ratios("e_constraint")
        return not any(m.failed for m in self.members) and all(x >= min_ratio for x in r)

    def e_u_decreasing(self) -> bool:
        vals = self.e_u
        return not any(m.failed for m in self.members) and all(b < a for a, b in zip(vals, vals[1:]))

    def to_dict(self) -> dict:
        return {
            "lambda": self.lambdas,
            "e_constraint": self.e_constraint,
            "e_u": self.e_u,
            "constraint_ratios": self.ratios("e_constraint"),
            "e_u_ratios": self.ratios("e_u"),
            "failed": [m.lam for m in self.members if m.failed],
            "control_lambda": self.control_lambda,
            "control_e_u": self.control_e_u,
            "scheme_fraction": self.scheme_fraction,
        }


def constraint_error(state: ZakharovState, bg: Background) -> float:
    """||n + |u|^2 + 2 Q Re u||_2 on the grid."""
    return constraint_residual(state, bg.Q)


def _run_member(cfg: SweepConfig, lam: float, dt: float | None = None
                ) -> tuple[MemberResult, np.ndarray | None, ZakharovState | None]:
    dt = cfg.dt_for(lam) if dt is None else dt
    res = MemberResult(lam=lam, dt=dt)
    try:
        params = SimParams(cfg.grid, lam, dt, cfg.T, "strang", cfg.dealias)
        s0 = cfg.initial.build(cfg.grid, lam)
        final, _ = evolve(s0, params, stride=max(1, round(cfg.T / dt)))
    except (NumericalInstability, ValueError) as exc:
        res.failed = True
        res.message = str(exc)
        log.warning("sweep member lambda=%g failed: %s", lam, exc)
        return res, None, None
    res.e_constraint = constraint_error(final, Background(cfg.grid))
    return res, final.u, final


def _member_task(args):
    cfg, lam, dt = args
    res, u, _ = _run_member(cfg, lam, dt)
    return res, u


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepReport:
    """Run every lambda member (optionally in parallel) and the NLS reference.

    With ``cfg.control`` the largest lambda and the NLS reference are rerun
    at half the step to bound the scheme-error share of e_u.
    """
    g = cfg.grid
    s0 = cfg.initial.build(g, cfg.lambdas[0])
    u_nls = evolve_pnls(s0.u, g, cfg.nls_dt, cfg.T, cfg.dealias)
    tasks = [(cfg, lam, None) for lam in cfg.lambdas]
    lam_c = cfg.lambdas[-1]
    if cfg.control:
        tasks.append((cfg, lam_c, cfg.dt_for(lam_c) / 2))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_member_task, tasks))
    else:
        outs = [_member_task(t) for t in tasks]
    report = SweepReport([])
    if cfg.control:
        (res_c, u_c), outs = outs[-1], outs[:-1]
        report.control_lambda = lam_c
        if u_c is not None:
            u_nls_c = evolve_pnls(s0.u, g, cfg.nls_dt / 2, cfg.T, cfg.dealias)
            report.control_e_u = g.hs_norm_complex(u_c - u_nls_c, 1.0)
    for res, u in outs:
        if u is not None:
            res.e_u = g.hs_norm_complex(u - u_nls, 1.0)
        report.members.append(res)
    return report
