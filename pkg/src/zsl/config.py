"""JSON experiment configuration: schema, validation and canonical hashing."""

from __future__ import annotations

import hashlib
import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

EXPERIMENTS = ("soliton-check", "evolve", "energy-drift", "lambda-sweep", "symbol-scan", "hyperbolic-check")
ExperimentId = Literal["soliton-check", "evolve", "energy-drift", "lambda-sweep", "symbol-scan", "hyperbolic-check"]


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` holds ``(path, reason)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{p}: {r}" if p else r for p, r in errors))


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)


class GridSpec(_Section):
    nx: int = Field(256, ge=8, le=4096)
    ny: int = Field(256, ge=8, le=4096)
    Lx: float = Field(40.0, gt=0, le=1e4)
    Ly: float = Field(40.0, gt=0, le=1e4)

    @field_validator("nx", "ny")
    @classmethod
    def _even(cls, v: int) -> int:
        if v % 2:
            raise ValueError("must be even")
        return v


class SimSpec(_Section):
    lam: float = Field(1.0, gt=0, le=1e4, alias="lambda")
    dt: float = Field(1e-3, gt=0, le=1.0)
    T: float = Field(1.0, ge=0, le=1e4)
    integrator: Literal["strang", "split_duhamel"] = "strang"
    dealias: bool = True


class InitialSpec(_Section):
    profile: Literal["zero", "gaussian", "mode", "prepared-gaussian"] = "gaussian"
    amplitude: float = Field(0.1, ge=0, le=10)
    width: float = Field(2.0, gt=0, le=1e3)
    center: tuple[float, float] = (0.0, 0.0)
    mode: tuple[int, int] = (1, 0)
    n_amplitude: float = Field(0.0, ge=-10, le=10)


class OutputSpec(_Section):
    csv_stride: int = Field(10, ge=1, le=10**7)
    checkpoint_stride: int = Field(0, ge=0, le=10**7)
    plots: bool = True
    norms_k: tuple[float, ...] = (0.0, 1.0, 2.0)

    @field_validator("norms_k")
    @classmethod
    def _k_range(cls, v):
        if not v or any(not (0 <= k <= 8) for k in v):
            raise ValueError("entries must lie in [0, 8] and the list must be non-empty")
        return v


class SolitonCheckSpec(_Section):
    ode_tol: float = Field(1e-8, gt=0)
    norm_tol: float = Field(1e-10, gt=0)


class EnergyDriftSpec(_Section):
    drift_tol: float = Field(1e-6, gt=0)
    ratio_min: float = Field(3.0, gt=0)
    ratio_max: float = Field(5.0, gt=0)


class SweepSpec(_Section):
    lambdas: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    T: float = Field(0.5, gt=0, le=1e3)
    dt0: float = Field(5e-3, gt=0, le=1.0)
    pnls_dt: Optional[float] = Field(None, gt=0, le=1.0)
    control: bool = True
    min_ratio: float = Field(1.3, gt=0)
    max_scheme_fraction: float = Field(0.1, gt=0)

    @field_validator("lambdas")
    @classmethod
    def _increasing(cls, v):
        if not v or any(x <= 0 for x in v) or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("must be a non-empty, strictly increasing list of positive numbers")
        return v


class ScanSpec(_Section):
    xi1: tuple[float, float] = (-20.0, 20.0)
    xi2: tuple[float, float] = (-20.0, 20.0)
    xi1p: tuple[float, float] = (-20.0, 20.0)
    tau: tuple[float, float] = (-20.0, 20.0)
    points: int = Field(64, ge=8, le=512)
    sign: Literal[1, -1] = 1
    refinements: int = Field(2, ge=0, le=10)
    symbol3_points: int = Field(126, ge=8, le=1024)
    nu: tuple[float, ...] = (1.5, 2.0, 4.0)
    samples: int = Field(1_000_000, ge=1, le=10**9)

    @field_validator("nu")
    @classmethod
    def _nu(cls, v):
        if not v or any(not x > 1 for x in v):
            raise ValueError("every nu must exceed 1")
        return v

    @field_validator("xi1", "xi2", "xi1p", "tau")
    @classmethod
    def _interval(cls, v):
        if not v[0] < v[1]:
            raise ValueError("interval must satisfy lo < hi")
        return v


class HyperbolicSpec(_Section):
    t_eval: float = Field(0.2, gt=0, le=1.0)
    dts: tuple[float, float] = (1e-3, 5e-4)
    w_T: float = Field(1.0, ge=0, le=1.0)
    w_stride: int = Field(50, ge=1)
    w_tol: float = Field(1e-7, gt=0)
    min_ratio: float = Field(3.5, gt=0)
    random_nodes: int = Field(1000, ge=1, le=10**6)
    equivalence_tol: float = Field(1e-10, gt=0)
    dealias: bool = False


class ExperimentConfig(_Section):
    experiment: Optional[ExperimentId] = None
    grid: GridSpec = GridSpec()
    sim: SimSpec = SimSpec()
    initial: InitialSpec = InitialSpec()
    output: OutputSpec = OutputSpec()
    seed: int = Field(0, ge=0, le=2**32 - 1)
    soliton_check: SolitonCheckSpec = SolitonCheckSpec()
    energy_drift: EnergyDriftSpec = EnergyDriftSpec()
    sweep: SweepSpec = SweepSpec()
    scan: ScanSpec = ScanSpec()
    hyperbolic: HyperbolicSpec = HyperbolicSpec()

    @model_validator(mode="after")
    def _ratio_bounds(self):
        if self.energy_drift.ratio_min > self.energy_drift.ratio_max:
            raise ValueError("energy_drift.ratio_min must not exceed ratio_max")
        o = self.output
        if o.checkpoint_stride % o.csv_stride:
            raise ValueError("output.checkpoint_stride must be a multiple of output.csv_stride")
        return self


def _valid_keys(model: type[BaseModel]) -> list[str]:
    return sorted(f.alias or name for name, f in model.model_fields.items())


def _model_at(loc: tuple) -> type[BaseModel] | None:
    model: type[BaseModel] = ExperimentConfig
    for key in loc:
        match = None
        for name, f in model.model_fields.items():
            if key in (name, f.alias):
                match = f.annotation
                break
        if not (isinstance(match, type) and issubclass(match, BaseModel)):
            return None
        model = match
    return model


def _translate(err: ValidationError) -> ConfigError:
    out = []
    for e in err.errors():
        loc = tuple(e["loc"])
        path = ".".join(str(p) for p in loc)
        if e["type"] == "extra_forbidden":
            parent = _model_at(loc[:-1])
            keys = _valid_keys(parent) if parent else []
            out.append((path, f"unknown key; valid keys: {', '.join(keys)}"))
        else:
            out.append((path, e["msg"]))
    return ConfigError(out)


def parse_config(text: str | bytes) -> ExperimentConfig:
    """Validate a UTF-8 JSON document; raise :class:`ConfigError` with paths."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError([("", f"not UTF-8: {exc}")]) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"invalid JSON: {exc}")]) from exc
    if not isinstance(raw, dict):
        raise ConfigError([("", "top level must be a JSON object")])
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise _translate(exc) from None


def to_dict(cfg: ExperimentConfig) -> dict:
    return cfg.model_dump(mode="json", by_alias=True)


def serialize(cfg: ExperimentConfig) -> str:
    """Canonical JSON (sorted keys, fixed separators)."""
    return json.dumps(to_dict(cfg), sort_keys=True, separators=(",", ":"))


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize(cfg).encode("utf-8")).hexdigest()
