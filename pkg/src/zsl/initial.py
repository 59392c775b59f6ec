"""Named analytic initial-data profiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .soliton import Background
from .solver import ZakharovState
from .spectral import Grid2D

PROFILES = ("zero", "gaussian", "mode", "prepared-gaussian")


@dataclass(frozen=True)
class InitialData:
    """Perturbation data at t = 0.

    ``gaussian``: u0 = amplitude * exp(-|x - center|^2 / width^2), with an
    optional n0 = n_amplitude * exp(-|x - center|^2 / width^2); v0 = 0.
    ``mode``: u0 = amplitude * exp(i k.x) for integer mode numbers ``mode``.
    ``prepared-gaussian``: gaussian u0 with n0 = -|u0|^2 - 2 Q Re u0 and
    n_t(0) = 0, i.e. data already on the subsonic constraint.
    """

    profile: str = "gaussian"
    amplitude: float = 0.1
    width: float = 2.0
    center: tuple[float, float] = (0.0, 0.0)
    mode: tuple[int, int] = (1, 0)
    n_amplitude: float = 0.0

    def __post_init__(self) -> None:
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; expected one of {PROFILES}")
        if self.width <= 0:
            raise ValueError("width must be positive")

    def _bump(self, g: Grid2D) -> np.ndarray:
        cx, cy = self.center
        return np.exp(-((g.X - cx) ** 2 + (g.Y - cy) ** 2) / self.width ** 2)

    def build(self, grid: Grid2D, lam: float = 1.0, t: float = 0.0) -> ZakharovState:
        z = ZakharovState.zeros(grid, t)
        if self.profile == "zero":
            return z
        if self.profile == "mode":
            kx = 2 * np.pi / grid.Lx * self.mode[0]
            ky = 2 * np.pi / grid.Ly * self.mode[1]
            u = self.amplitude * np.exp(1j * (kx * grid.X + ky * grid.Y))
            return ZakharovState(grid, t, u, z.n, z.v)
        bump = self._bump(grid)
        u = self.amplitude * bump + 0j
        if self.profile == "gaussian":
            n = self.n_amplitude * bump
        else:
            Q = Background(grid).Q
            n = -(np.abs(u) ** 2) - 2.0 * Q * u.real
        return ZakharovState(grid, t, u, n, z.v)
