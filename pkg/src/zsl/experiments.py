"""Experiment runners behind the ``zsl`` command line.

Every runner writes its artifacts into one output directory and returns an
:class:`Outcome`. ``run`` wraps a runner with the summary JSON, the
timestamp sidecar and exit-code mapping:

    0  every gating check passed
    1  at least one gating check failed
    2  configuration or IO failure
    3  numerical abort (the last good state is kept as a checkpoint)

Artifact bytes depend only on the configuration and the thread count; wall
times and timestamps go to ``run_info.json``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import platform
import time
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .checkpoint import write_checkpoint
from .config import ExperimentConfig, config_hash, to_dict
from .diagnostics import DiagnosticsRecord, energy_drift, format_float, records_to_csv
from .hyperbolic import (C1, C2, K, background_nodes, build_U, coefficient_matrices, direct_residual,
                         matrix_residual, mollifier_symbol, system_residual, w_constraint)
from .initial import InitialData
from .limit import SweepConfig, run_sweep
from .plot import line_chart
from .soliton import Background, BoxTooSmallWarning, ode_residual
from .solver import NumericalInstability, SimParams, SplitState, ZakharovState, evolve, from_split, to_split
from .spectral import Grid2D, set_fft_workers
from .symbols import ScanConfig, check_B_region, check_symbol3, check_z_inequality, scan_symbol1, scan_symbol2

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class OutputError(OSError):
    pass


@dataclass
class Check:
    passed: bool
    value: object
    threshold: object

    def to_dict(self) -> dict:
        return {"pass": bool(self.passed), "value": self.value, "threshold": self.threshold}


@dataclass
class Outcome:
    checks: dict[str, Check] = field(default_factory=dict)
    scalars: dict[str, object] = field(default_factory=dict)
    aborted: str | None = None

    @property
    def passed(self) -> bool:
        return self.aborted is None and all(c.passed for c in self.checks.values())


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


class Output:
    """Single writer for one run directory; every write is reported as a
    relative name so the summary can list the artifacts."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.files: list[str] = []
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {self.root}: {exc}") from exc

    def _track(self, name: str) -> Path:
        if name not in self.files:
            self.files.append(name)
        return self.root / name

    def text(self, name: str, content: str) -> None:
        path = self._track(name)
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(content)
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from exc

    def json(self, name: str, obj) -> None:
        self.text(name, dumps(obj))

    def table(self, name: str, header: list[str], rows: list[list]) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([format_float(x) if isinstance(x, (float, np.floating)) else x for x in r])
        self.text(name, buf.getvalue())

    def checkpoint(self, name: str, state: ZakharovState, lam: float) -> None:
        path = self._track(name)
        try:
            write_checkpoint(path, state, lam)
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}") from exc


# -- helpers -----------------------------------------------------------------


def _grid(cfg: ExperimentConfig) -> Grid2D:
    g = cfg.grid
    return Grid2D(g.nx, g.ny, g.Lx, g.Ly)


def _initial(cfg: ExperimentConfig) -> InitialData:
    i = cfg.initial
    return InitialData(i.profile, i.amplitude, i.width, tuple(i.center), tuple(i.mode), i.n_amplitude)


def _params(cfg: ExperimentConfig, grid: Grid2D, **over) -> SimParams:
    s = cfg.sim
    kw = dict(lam=s.lam, dt=s.dt, T=s.T, integrator=s.integrator, dealias=s.dealias)
    kw.update(over)
    return SimParams(grid, **kw)


def _as_zakharov(state, lam: float) -> ZakharovState:
    return from_split(state, lam) if isinstance(state, SplitState) else state


def _simulate(cfg: ExperimentConfig, out: Output, params: SimParams, s0: ZakharovState, *,
              stride: int, checkpoint_stride: int = 0, prefix: str = "") -> tuple[ZakharovState, list]:
    """Run one simulation with diagnostics and periodic checkpoints.

    On a numerical abort the last good state is written to
    ``<prefix>checkpoint_last_good.bin`` and the exception propagates.
    """
    lam = params.lam
    state0 = to_split(s0, lam) if params.integrator == "split_duhamel" else s0
    records: list[DiagnosticsRecord] = []
    last_good = {"state": s0}

    def observe(state, rec):
        z = _as_zakharov(state, lam)
        last_good["state"] = z
        records.append(rec)
        step = round((z.t - s0.t) / params.dt)
        if checkpoint_stride and step % checkpoint_stride == 0:
            out.checkpoint(f"{prefix}checkpoint_{step:08d}.bin", z, lam)

    try:
        final, _ = evolve(state0, params, observer=observe, stride=stride,
                          norms_k=tuple(cfg.output.norms_k))
    except NumericalInstability as exc:
        good = exc.last_state if exc.last_state is not None else last_good["state"]
        good = _as_zakharov(good, lam)
        out.checkpoint(f"{prefix}checkpoint_last_good.bin", good, lam)
        if records:
            out.text(f"{prefix}diagnostics.csv", records_to_csv(records))
        raise
    final = _as_zakharov(final, lam)
    out.checkpoint(f"{prefix}checkpoint_final.bin", final, lam)
    return final, records


def _norm_series(records, key: str):
    ts = [r.t for r in records]
    if key.startswith("u_h"):
        k = float(key[3:])
        return ts, [r.u_hk[k] for r in records]
    return ts, [getattr(r, key) for r in records]


# -- runners -----------------------------------------------------------------


def soliton_check(cfg: ExperimentConfig, out: Output, threads: int) -> Outcome:
    o = Outcome()
    g = _grid(cfg)
    sc = cfg.soliton_check
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoxTooSmallWarning)
        res = ode_residual(g)
    o.scalars["box_too_small"] = any(issubclass(w.category, BoxTooSmallWarning) for w in caught)
    o.checks["ode_residual"] = Check(res < sc.ode_tol, res, sc.ode_tol)

    params = _params(cfg, g)
    zero = ZakharovState.zeros(g)
    _, recs = _simulate(cfg, out, params, zero, stride=cfg.output.csv_stride)
    out.text("diagnostics.csv", records_to_csv(recs))
    worst = max(max(max(r.u_hk.values()), r.n_l2, r.v_l2) for r in recs)
    o.checks["zero_perturbation_norms"] = Check(worst < sc.norm_tol, worst, sc.norm_tol)
    o.scalars.update(T=params.T, dt=params.dt, steps=round(params.T / params.dt))
    return o


def evolve_run(cfg: ExperimentConfig, out: Output, threads: int) -> Outcome:
    o = Outcome()
    g = _grid(cfg)
    params = _params(cfg, g)
    s0 = _initial(cfg).build(g, params.lam)
    final, recs = _simulate(cfg, out, params, s0, stride=cfg.output.csv_stride,
                            checkpoint_stride=cfg.output.checkpoint_stride)
    out.text("diagnostics.csv", records_to_csv(recs))
    o.scalars.update(energy_initial=recs[0].energy, energy_final=recs[-1].energy,
                     energy_drift=energy_drift(recs), t_final=final.t)
    o.checks["finite"] = Check(final.is_finite(), True, True)
    if cfg.initial.profile == "zero":
        worst = max(max(max(r.u_hk.values()), r.n_l2, r.v_l2) for r in recs)
        o.checks["zero_norms"] = Check(worst < cfg.soliton_check.norm_tol, worst, cfg.soliton_check.norm_tol)
    if cfg.output.plots:
        series = {f"||u||_H{k:g}": _norm_series(recs, f"u_h{k:g}") for k in cfg.output.norms_k}
        series["||n||_2"] = _norm_series(recs, "n_l2")
        out.text("norms.svg", line_chart(series, title="perturbation norms", xlabel="t"))
        out.text("energy.svg", line_chart({"E(t)": _norm_series(recs, "energy")},
                                          title="energy", xlabel="t"))
    return o


def energy_drift_run(cfg: ExperimentConfig, out: Output, threads: int) -> Outcome:
    o = Outcome()
    g = _grid(cfg)
    ed = cfg.energy_drift
    p1 = _params(cfg, g)
    p2 = _params(cfg, g, dt=p1.dt / 2)
    s0 = _initial(cfg).build(g, p1.lam)
    stride = cfg.output.csv_stride
    _, r1 = _simulate(cfg, out, p1, s0, stride=stride, prefix="dt_")
    out.text("diagnostics.csv", records_to_csv(r1))
    _, r2 = _simulate(cfg, out, p2, s0, stride=2 * stride, prefix="half_dt_")
    out.text("diagnostics_half_dt.csv", records_to_csv(r2))
    d1, d2 = energy_drift(r1), energy_drift(r2)
    ratio = d1 / d2 if d2 > 0 else math.inf
    e0 = r1[0].energy
    strict = max(abs(r.energy - e0) for r in r1) / abs(e0) if e0 else math.inf
    o.scalars.update(dt=p1.dt, energy_initial=e0, drift_dt=d1, drift_half_dt=d2, ratio=ratio,
                     drift_dt_over_abs_E0=strict)
    o.checks["drift"] = Check(d1 < ed.drift_tol, d1, ed.drift_tol)
    o.checks["drift_ratio"] = Check(ed.ratio_min <= ratio <= ed.ratio_max, ratio,
                                    [ed.ratio_min, ed.ratio_max])
    if cfg.output.plots:
        e0 = r1[0].energy
        out.text("energy_drift.svg", line_chart({
            f"dt={p1.dt:g}": ([r.t for r in r1], [abs(r.energy - e0) for r in r1]),
            f"dt={p2.dt:g}": ([r.t for r in r2], [abs(r.energy - e0) for r in r2]),
        }, title="|E(t) - E(0)|", xlabel="t"))
    return o


def lambda_sweep(cfg: ExperimentConfig, out: Output, threads: int) -> Outcome:
    o = Outcome()
    g = _grid(cfg)
    sp = cfg.sweep
    scfg = SweepConfig(g, tuple(sp.lambdas), _initial(cfg), sp.T, sp.dt0, sp.pnls_dt,
                       cfg.sim.dealias, sp.control)
    rep = run_sweep(scfg, workers=threads)
    rows = [[m.lam, m.dt, m.e_constraint, m.e_u, int(m.failed)] for m in rep.members]
    out.table("sweep.csv", ["lambda", "dt", "e_constraint", "e_u", "failed"], rows)
    out.json("sweep.json", rep.to_dict())
    ratios = rep.ratios("e_constraint")
    o.checks["constraint_monotone"] = Check(rep.constraint_monotone(sp.min_ratio),
                                            min(ratios) if ratios else None, sp.min_ratio)
    o.checks["e_u_decreasing"] = Check(rep.e_u_decreasing(), rep.e_u, "strictly decreasing")
    if sp.control:
        frac = rep.scheme_fraction
        o.checks["scheme_fraction"] = Check(frac < sp.max_scheme_fraction, frac, sp.max_scheme_fraction)
    o.scalars.update(rep.to_dict())
    if cfg.output.plots:
        out.text("sweep.svg", line_chart({
            "e_constraint": (rep.lambdas, rep.e_constraint),
            "e_u (H1)": (rep.lambdas, rep.e_u),
        }, title="subsonic limit", xlabel="lambda", loglog=True))
    return o


def symbol_scan(cfg: ExperimentConfig, out: Output, threads: int) -> Outcome:
    o = Outcome()
    s = cfg.scan
    sc = ScanConfig(tuple(s.xi1), tuple(s.xi2), tuple(s.xi1p), tuple(s.tau), s.points, s.sign,
                    s.refinements, s.symbol3_points, tuple(s.nu), s.samples, cfg.seed, threads)
    reports = [scan_symbol1(sc), scan_symbol2(sc), check_symbol3(sc), check_z_inequality(sc), check_B_region(sc)]
    rows = []
    for r in reports:
        out.json(f"{r.id}.json", r.to_dict())
        rows.append([r.id, r.C, r.points, r.violations, int(r.stable)])
        if r.id in ("symbol3", "symbol4"):
            o.checks[r.id] = Check(r.ok, {"C": r.C, "violations": r.violations}, r.bound)
        else:
            o.checks[r.id] = Check(r.ok and r.stable, {"C": r.C, "history": r.history},
                                   {"stable_within": 0.05, "bound": r.bound})
    out.table("scans.csv", ["id", "C", "points", "violations", "stable"], rows)
    return o


def _manufactured(g: Grid2D, rng: np.random.Generator, bumps: int = 3) -> np.ndarray:
    """Nine smooth fields, each a sum of Gaussians with random centres."""
    out = np.zeros((9,) + g.shape)
    for c in range(9):
        for _ in range(bumps):
            a, cx, cy = rng.normal(), rng.uniform(-6, 6), rng.uniform(-6, 6)
            w = rng.uniform(1.5, 3.0)
            out[c] += a * np.exp(-((g.X - cx) ** 2 + (g.Y - cy) ** 2) / w ** 2)
    return out


def hyperbolic_check(cfg: ExperimentConfig, out: Output, threads: int) -> Outcome:
    o = Outcome()
    h = cfg.hyperbolic
    g = _grid(cfg)
    bg = Background(g)
    lam = cfg.sim.lam
    rng = np.random.default_rng(cfg.seed)

    # (a) symmetry at random nodes and times
    m = h.random_nodes
    ix, iy = rng.integers(0, g.nx, m), rng.integers(0, g.ny, m)
    U = rng.normal(size=(9, m))
    times = rng.uniform(0, 2 * np.pi, 10)
    group = np.arange(m) % len(times)
    fields: dict[str, np.ndarray] = {}
    for j, t_val in enumerate(times):
        sel = group == j
        for k, arr in background_nodes(bg, float(t_val)).items():
            fields.setdefault(k, np.empty(m))[sel] = arr[ix[sel], iy[sel]]
    cm = coefficient_matrices(U, fields)
    sym = {name: getattr(cm, name) for name in ("A1", "A2", "B1", "B2")}
    asym_max = max(float(np.max(np.abs(M - np.swapaxes(M, 0, 1)))) for M in sym.values())
    asym_max = max(asym_max, float(np.max(np.abs(C1 - C1.T))), float(np.max(np.abs(C2 - C2.T))))
    k_err = float(np.max(np.abs(K + K.T)))
    o.checks["symmetry"] = Check(asym_max == 0.0 and k_err == 0.0,
                                 {"max_asymmetry": asym_max, "K_plus_KT": k_err}, 0.0)

    # (b) matrix form against the component equations on manufactured fields
    Um, Utm = _manufactured(g, rng), _manufactured(g, rng)
    t_m = float(rng.uniform(0, 2 * np.pi))
    nodes = background_nodes(bg, t_m)
    diff = g.l2(matrix_residual(Um, Utm, g, nodes, lam) - direct_residual(Um, Utm, g, nodes, lam))
    o.checks["equivalence"] = Check(diff < h.equivalence_tol, diff, h.equivalence_tol)

    # (c) trajectory: W constraint and residual convergence
    s0 = _initial(cfg).build(g, lam)
    w_max = 0.0

    def watch(state, rec):
        nonlocal w_max
        w_max = max(w_max, w_constraint(build_U(state, bg, lam)))

    dt_w = h.dts[0]
    evolve(s0, SimParams(g, lam, dt_w, h.w_T, "strang", h.dealias), observer=watch,
           stride=h.w_stride, norms_k=(0.0,))
    o.checks["w_constraint"] = Check(w_max < h.w_tol, w_max, h.w_tol)

    residuals = []
    for dt in h.dts:
        p_prev = SimParams(g, lam, dt, h.t_eval - dt, "strang", h.dealias)
        a, _ = evolve(s0, p_prev, stride=max(1, round(p_prev.T / dt)), norms_k=(0.0,))
        b, _ = evolve(a, SimParams(g, lam, dt, h.t_eval, "strang", h.dealias), norms_k=(0.0,))
        c, _ = evolve(b, SimParams(g, lam, dt, h.t_eval + dt, "strang", h.dealias), norms_k=(0.0,))
        residuals.append(system_residual(*(build_U(x, bg, lam) for x in (a, b, c)), bg, lam))
    ratio = residuals[0] / residuals[1] if residuals[1] > 0 else math.inf
    o.checks["residual_ratio"] = Check(ratio >= h.min_ratio, ratio, h.min_ratio)
    out.table("hyperbolic_residual.csv", ["dt", "residual"], [[dt, r] for dt, r in zip(h.dts, residuals)])

    # mollifier sanity: unit mass kernel
    mass = float(mollifier_symbol(g, 4 * max(g.dx, g.dy))[0, 0].real)
    o.scalars.update(residuals=residuals, w_max=w_max, mollifier_mass=mass)
    return o


RUNNERS: dict[str, Callable[[ExperimentConfig, Output, int], Outcome]] = {
    "soliton-check": soliton_check,
    "evolve": evolve_run,
    "energy-drift": energy_drift_run,
    "lambda-sweep": lambda_sweep,
    "symbol-scan": symbol_scan,
    "hyperbolic-check": hyperbolic_check,
}


def run(experiment: str, cfg: ExperimentConfig, out_dir, threads: int = 1) -> int:
    """Execute one experiment and write its summary; returns the exit code."""
    if cfg.experiment is not None and cfg.experiment != experiment:
        log.error("config is for %r but subcommand is %r", cfg.experiment, experiment)
        return EXIT_IO
    set_fft_workers(threads)
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        out = Output(Path(out_dir))
        out.text("config.json", json.dumps(to_dict(cfg), sort_keys=True, indent=2) + "\n")
        try:
            outcome = RUNNERS[experiment](cfg, out, threads)
        except NumericalInstability as exc:
            log.error("numerical abort at t=%g: %s", exc.t, exc)
            outcome = Outcome(aborted=f"numerical abort at t={exc.t!r}: {exc}")
        code = EXIT_OK if outcome.passed else EXIT_NUMERIC if outcome.aborted else EXIT_CHECK_FAILED
        summary = {
            "experiment": experiment,
            "config_hash": config_hash(cfg),
            "passed": outcome.passed,
            "exit_code": code,
            "aborted": outcome.aborted,
            "checks": {k: c.to_dict() for k, c in outcome.checks.items()},
            "scalars": outcome.scalars,
            "files": sorted(out.files + ["summary.json"]),
            "threads": threads,
        }
        out.json("summary.json", summary)
        out.json("run_info.json", {
            "started": started.isoformat(),
            "finished": datetime.now(timezone.utc).isoformat(),
            "wall_seconds": time.perf_counter() - t0,
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        })
    except OutputError as exc:
        log.error("%s", exc)
        return EXIT_IO
    for name, c in outcome.checks.items():
        log.info("%-24s %s  value=%s", name, "PASS" if c.passed else "FAIL", c.value)
    return code


__all__ = ["run", "RUNNERS", "Outcome", "Check", "EXIT_OK", "EXIT_CHECK_FAILED", "EXIT_IO", "EXIT_NUMERIC"]
