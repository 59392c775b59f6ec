"""Line-soliton background: the ground state Q and the fields derived from it."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .spectral import Grid2D, irfft2, rfft2

SQRT2 = np.sqrt(2.0)


class BoxTooSmallWarning(UserWarning):
    """Q has not decayed at the box edge, so periodization error is visible."""


def eval_Q(x):
    """Ground state Q(x) = 2*sqrt(2)/(e^x + e^-x).

    Written as 2*sqrt(2)*e^-|x| / (1 + e^-2|x|) so large |x| underflows to 0
    instead of overflowing.
    """
    ax = np.abs(np.asarray(x, dtype=float))
    e = np.exp(-ax)
    out = 2.0 * SQRT2 * e / (1.0 + e * e)
    return float(out) if out.ndim == 0 else out


def eval_Qx(x):
    """Derivative Q'(x) = -Q(x) tanh(x)."""
    x = np.asarray(x, dtype=float)
    out = -eval_Q(x) * np.tanh(x)
    return float(out) if np.ndim(out) == 0 else out


def periodized(fn, x, period: float, images: int = 2):
    """Sum of ``fn`` over periodic images, paired so even ``fn`` stays
    exactly even on mirrored points."""
    out = fn(x)
    for m in range(1, images + 1):
        out = out + (fn(x + m * period) + fn(x - m * period))
    return out


@dataclass(frozen=True, eq=False)
class Background:
    """Q, Q^2 and Q_x sampled on a grid (constant in y).

    Samples are the periodic image sum of the line profile, which is smooth on
    the torus; the raw profile has a kink of size ~Q(Lx/2) at the seam.
    """

    grid: Grid2D

    def __post_init__(self) -> None:
        g = self.grid
        q = periodized(eval_Q, g.X, g.Lx)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "Q2", q * q)
        object.__setattr__(self, "Qx", periodized(eval_Qx, g.X, g.Lx))
        for a in (self.Q, self.Q2, self.Qx):
            a.setflags(write=False)

    @property
    def phi1(self) -> np.ndarray:
        """Wave-field background -Q^2 (time independent)."""
        return -self.Q2

    def phi(self, t: float) -> np.ndarray:
        """Schrodinger background e^{it} Q in the ungauged frame."""
        return np.exp(1j * t) * self.Q

    def components(self, t: float) -> dict[str, np.ndarray]:
        return background_components(self, t)


def background_components(bg: Background, t: float) -> dict[str, np.ndarray]:
    """Background parts (F_r, G_r, H_r, L_r, P_r, V_r) at time ``t``.

    ``H_r`` and ``L_r`` are 2-vectors with zero y-component; ``P_r`` and
    ``V_r`` vanish identically because phi1 = -|phi|^2 is static.
    """
    c, s = np.cos(t), np.sin(t)
    zero = np.zeros_like(bg.Q)
    Hr = np.stack([SQRT2 * c * bg.Qx, zero])
    Lr = np.stack([SQRT2 * s * bg.Qx, zero])
    return {
        "F_r": SQRT2 * c * bg.Q,
        "G_r": SQRT2 * s * bg.Q,
        "H_r": Hr,
        "L_r": Lr,
        # |e^{it} Q|^2 == Q^2 exactly
        "P_r": bg.phi1 + bg.Q2,
        "V_r": np.zeros((2,) + bg.Q.shape),
    }


def ode_residual(grid: Grid2D, boundary_tol: float = 1e-8) -> float:
    """Max-norm of Q_xx - Q + Q^3 with Q_xx taken spectrally on ``grid``.

    Uses the same periodized samples as :class:`Background`. Warns when the
    profile has not decayed below ``boundary_tol`` at the box edge.
    """
    edge = eval_Q(grid.Lx / 2)
    if edge > boundary_tol:
        warnings.warn(
            f"Q(Lx/2) = {edge:.3e} exceeds {boundary_tol:g}; box too small for the soliton",
            BoxTooSmallWarning,
            stacklevel=2,
        )
    q = periodized(eval_Q, grid.X, grid.Lx)
    qxx = irfft2(-(grid.kx ** 2) * rfft2(q), grid.shape)
    return float(np.max(np.abs(qxx - q + q ** 3)))
