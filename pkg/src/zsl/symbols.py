"""Brute-force checks of the pointwise symbol inequalities behind the
Bourgain-space estimates for the linear coupling terms.

Variables are xi = (xi1, xi2), xi1p (the soliton frequency shift) and tau,
with eta = (xi1 - xi1p, xi2) and <a> = sqrt(1 + |a|^2). For each ratio

    symbol1: <xi>^2 / (<tau +- |eta|> + <tau + |xi|^2> + <xi1p>)
    symbol2: <xi>^2 / (<tau +- |xi|> + <tau +- |eta|^2> + <xi1p>^2)
    symbol3: <xi> / (<xi1p> <eta>)                       (C = sqrt 2 claimed)
    symbol5: <xi>^2 / (<xi1p> + 2<tau +- |eta|> + 2<tau + |xi|^2> chi_B),
             restricted to |xi| >= 2|xi1p|

the scan evaluates a 4-D grid, then twice re-grids a box of half the width
centred on the running argmax. The z-inequality is checked by Monte Carlo.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

AXES = ("xi1", "xi2", "xi1p", "tau")
SQRT2 = math.sqrt(2.0)
SYMBOL3_TOL = 1e-12
Z_RTOL = 1e-12


def japanese(a: np.ndarray) -> np.ndarray:
    return np.sqrt(1.0 + a * a)


@dataclass(frozen=True)
class ScanConfig:
    xi1: tuple[float, float] = (-20.0, 20.0)
    xi2: tuple[float, float] = (-20.0, 20.0)
    xi1p: tuple[float, float] = (-20.0, 20.0)
    tau: tuple[float, float] = (-20.0, 20.0)
    points: int = 64
    sign: int = 1
    refinements: int = 2
    symbol3_points: int = 126
    nu: tuple[float, ...] = (1.5, 2.0, 4.0)
    samples: int = 1_000_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        for ax in AXES:
            lo, hi = getattr(self, ax)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"range {ax} must be a finite interval lo < hi")
        if self.points < 8 or self.symbol3_points < 8:
            raise ValueError("at least 8 points per axis are required")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.refinements < 0:
            raise ValueError("refinements must be >= 0")
        if not self.nu or any(not nu > 1 for nu in self.nu):
            raise ValueError("every nu must exceed 1")
        if self.samples < 1:
            raise ValueError("samples must be positive")

    def box(self) -> list[tuple[float, float]]:
        return [tuple(map(float, getattr(self, ax))) for ax in AXES]


@dataclass
class ScanReport:
    id: str
    C: float
    witness: dict[str, float]
    history: list[float] = field(default_factory=list)
    points: int = 0
    violations: int = 0
    bound: float | None = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.C) and self.C > 0

    @property
    def stable(self) -> bool:
        """Last two refinement levels agree within 5%."""
        h = self.history
        if len(h) < 2:
            return False
        return abs(h[-1] - h[-2]) <= 0.05 * abs(h[-2])

    @property
    def ok(self) -> bool:
        good = self.finite and self.violations == 0
        if self.bound is not None:
            good = good and self.C <= self.bound
        return good

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stable"] = self.stable
        d["ok"] = self.ok
        return d


# -- ratio functions ---------------------------------------------------------


def ratio_symbol1(xi1, xi2, xi1p, tau, sign=1):
    xi_sq = xi1 * xi1 + xi2 * xi2
    eta = np.sqrt((xi1 - xi1p) ** 2 + xi2 * xi2)
    den = japanese(tau + sign * eta) + japanese(tau + xi_sq) + japanese(xi1p)
    return (1.0 + xi_sq) / den


def ratio_symbol2(xi1, xi2, xi1p, tau, sign=1):
    xi_sq = xi1 * xi1 + xi2 * xi2
    eta_sq = (xi1 - xi1p) ** 2 + xi2 * xi2
    den = japanese(tau + sign * np.sqrt(xi_sq)) + japanese(tau + sign * eta_sq) + (1.0 + xi1p * xi1p)
    return (1.0 + xi_sq) / den


def ratio_symbol3(xi1, xi2, xi1p):
    xi_sq = xi1 * xi1 + xi2 * xi2
    eta_sq = (xi1 - xi1p) ** 2 + xi2 * xi2
    return np.sqrt((1.0 + xi_sq) / ((1.0 + xi1p * xi1p) * (1.0 + eta_sq)))


def in_region_B(xi_abs, tau):
    """1/2 (|xi|^2 - 3/2 |xi|) <= |tau + |xi|^2| <= 3/2 (|xi|^2 + 3/2 |xi|)."""
    a = np.abs(tau + xi_abs ** 2)
    return (0.5 * (xi_abs ** 2 - 1.5 * xi_abs) <= a) & (a <= 1.5 * (xi_abs ** 2 + 1.5 * xi_abs))


def ratio_symbol5(xi1, xi2, xi1p, tau, sign=1):
    """NaN where the hypothesis |xi| >= 2|xi1p| fails."""
    xi_sq = xi1 * xi1 + xi2 * xi2
    xi_abs = np.sqrt(xi_sq)
    eta = np.sqrt((xi1 - xi1p) ** 2 + xi2 * xi2)
    chi = in_region_B(xi_abs, tau)
    den = japanese(xi1p) + 2.0 * japanese(tau + sign * eta) + 2.0 * japanese(tau + xi_sq) * chi
    r = (1.0 + xi_sq) / den
    return np.where(xi_abs >= 2.0 * np.abs(xi1p), r, np.nan)


# -- grid scan ---------------------------------------------------------------


def _axes(box, n):
    return [np.linspace(lo, hi, n) for lo, hi in box]


def _grid_max(fn: Callable, box, n: int, workers: int) -> tuple[float, tuple[float, ...], int]:
    """Max of fn over an n^4 grid; tiles are slices along the first axis."""
    a0, a1, a2, a3 = _axes(box, n)
    B = a1[:, None, None]
    Cc = a2[None, :, None]
    D = a3[None, None, :]

    def tile(i):
        r = fn(a0[i], B, Cc, D)
        valid = int(np.count_nonzero(~np.isnan(r)))
        if valid == 0:
            return -math.inf, None, 0
        j = int(np.nanargmax(r))
        return float(r.flat[j]), (i,) + np.unravel_index(j, r.shape), valid

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            outs = list(ex.map(tile, range(n)))
    else:
        outs = [tile(i) for i in range(n)]
    best, idx, count = -math.inf, None, 0
    for val, ix, cnt in outs:  # ordered reduce: first maximum wins
        count += cnt
        if ix is not None and val > best:
            best, idx = val, ix
    if idx is None:
        return math.nan, (), count
    axes = (a0, a1, a2, a3)
    return best, tuple(float(axes[k][idx[k]]) for k in range(4)), count


def _shrink(box, centre, limits):
    out = []
    for (lo, hi), c, (llo, lhi) in zip(box, centre, limits):
        half = 0.25 * (hi - lo)
        a, b = c - half, c + half
        if a < llo:
            a, b = llo, llo + 2 * half
        if b > lhi:
            a, b = lhi - 2 * half, lhi
        out.append((a, b))
    return out


def refine_scan(ident: str, fn: Callable, cfg: ScanConfig, bound: float | None = None) -> ScanReport:
    limits = cfg.box()
    box = limits
    history: list[float] = []
    best, witness, total = -math.inf, (), 0
    for level in range(cfg.refinements + 1):
        val, w, cnt = _grid_max(fn, box, cfg.points, cfg.workers)
        total += cnt
        if not math.isnan(val) and val > best:
            best, witness = val, w
        history.append(best)
        if level < cfg.refinements and witness:
            box = _shrink(box, witness, limits)
    wit = dict(zip(AXES, witness)) if witness else {}
    return ScanReport(ident, float(best), wit, history, total, 0, bound)


def scan_symbol1(cfg: ScanConfig) -> ScanReport:
    s = cfg.sign
    return refine_scan("symbol1", lambda a, b, c, d: ratio_symbol1(a, b, c, d, s), cfg, bound=50.0)


def scan_symbol2(cfg: ScanConfig) -> ScanReport:
    s = cfg.sign
    return refine_scan("symbol2", lambda a, b, c, d: ratio_symbol2(a, b, c, d, s), cfg)


def check_B_region(cfg: ScanConfig) -> ScanReport:
    s = cfg.sign
    return refine_scan("symbol5", lambda a, b, c, d: ratio_symbol5(a, b, c, d, s), cfg)


def check_symbol3(cfg: ScanConfig) -> ScanReport:
    """Every grid point must satisfy ratio <= sqrt 2 (+1e-12)."""
    n = cfg.symbol3_points
    a0, a1, a2 = _axes(cfg.box()[:3], n)
    B = a1[:, None]
    Cc = a2[None, :]
    best, witness, viol = -math.inf, (), 0
    for i, x in enumerate(a0):
        r = ratio_symbol3(x, B, Cc)
        viol += int(np.count_nonzero(r > SQRT2 + SYMBOL3_TOL))
        j = int(np.argmax(r))
        if r.flat[j] > best:
            jj = np.unravel_index(j, r.shape)
            best, witness = float(r.flat[j]), (float(x), float(a1[jj[0]]), float(a2[jj[1]]))
    return ScanReport("symbol3", best, dict(zip(AXES[:3], witness)), [best], n ** 3, viol, SQRT2 + SYMBOL3_TOL)


# -- z-inequality --------------------------------------------------------------


def z_rhs(y1: np.ndarray, y2: np.ndarray, nu: float) -> np.ndarray:
    """nu|y2| + nu/(nu-1)|y1| chi(|z| >= nu|y2|) chi(nu/(nu+1) <= |z|/|y1| <= nu/(nu-1))."""
    z = np.linalg.norm(y1 - y2, axis=-1)
    a1 = np.linalg.norm(y1, axis=-1)
    a2 = np.linalg.norm(y2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(a1 > 0, z / np.where(a1 > 0, a1, 1.0), np.inf)
    chi = (z >= nu * a2) & (q >= nu / (nu + 1)) & (q <= nu / (nu - 1))
    return nu * a2 + nu / (nu - 1) * a1 * chi


def _z_samples(rng: np.random.Generator, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectors in R^2 on log-uniform scales, with a share of near-collinear
    and degenerate pairs to probe the indicator edges."""
    y1 = rng.standard_normal((m, 2)) * 10.0 ** rng.uniform(-3, 3, (m, 1))
    y2 = rng.standard_normal((m, 2)) * 10.0 ** rng.uniform(-3, 3, (m, 1))
    k = m // 4
    y2[:k] = y1[:k] * rng.uniform(-2, 2, (k, 1))  # collinear
    y2[k:k + m // 50] = 0.0
    y2[k + m // 50:k + m // 25] = y1[k + m // 50:k + m // 25]
    return y1, y2


def check_z_inequality(cfg: ScanConfig) -> ScanReport:
    rng = np.random.default_rng(cfg.seed)
    per = -(-cfg.samples // len(cfg.nu))
    best, witness, viol, total = 0.0, {}, 0, 0
    for nu in cfg.nu:
        y1, y2 = _z_samples(rng, per)
        z = np.linalg.norm(y1 - y2, axis=-1)
        rhs = z_rhs(y1, y2, nu)
        bad = z > rhs * (1.0 + Z_RTOL)
        viol += int(np.count_nonzero(bad))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(rhs > 0, z / np.where(rhs > 0, rhs, 1.0), np.where(z > 0, np.inf, 0.0))
        j = int(np.argmax(r))
        if r[j] > best or not witness:
            best = float(r[j])
            witness = {"nu": float(nu), "y1_1": float(y1[j, 0]), "y1_2": float(y1[j, 1]),
                       "y2_1": float(y2[j, 0]), "y2_2": float(y2[j, 1])}
        total += per
    return ScanReport("symbol4", best, witness, [best], total, viol, 1.0 + Z_RTOL)


def run_all(cfg: ScanConfig) -> list[ScanReport]:
    return [scan_symbol1(cfg), scan_symbol2(cfg), check_symbol3(cfg),
            check_z_inequality(cfg), check_B_region(cfg)]
