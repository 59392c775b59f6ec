"""Periodic grid, field containers and Fourier-multiplier operators.

Transforms use the unnormalized forward DFT and carry ``1/(nx*ny)`` on the
inverse. With that convention the discrete L2 norm is

    ||f||^2 = dx*dy * sum |f|^2 = (Lx*Ly / (nx*ny)^2) * sum |f_hat|^2

and every norm in the package is computed with these weights.

Fields are indexed ``[ix, iy]``; axis 0 is x (the direction in which the line
soliton varies).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.fft as sfft

_WORKERS = 1


def set_fft_workers(n: int) -> None:
    """Cap the thread count used by the FFT backend."""
    global _WORKERS
    _WORKERS = max(1, int(n))


def fft2(a: np.ndarray) -> np.ndarray:
    return sfft.fft2(a, axes=(-2, -1), workers=_WORKERS)


def ifft2(a: np.ndarray) -> np.ndarray:
    return sfft.ifft2(a, axes=(-2, -1), workers=_WORKERS)


def rfft2(a: np.ndarray) -> np.ndarray:
    return sfft.rfft2(a, axes=(-2, -1), workers=_WORKERS)


def irfft2(a: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    return sfft.irfft2(a, s=shape, axes=(-2, -1), workers=_WORKERS)


def _int_freqs(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on ``[-Lx/2, Lx/2) x [-Ly/2, Ly/2)``.

    Wavenumber tables come in two layouts: full (for ``fft2``, complex
    fields) and half (for ``rfft2``, real fields; suffix ``_r``). The ``_odd``
    tables have the Nyquist entry zeroed and are used by every odd-order
    derivative so real fields stay real.
    """

    nx: int
    ny: int
    Lx: float = 40.0
    Ly: float = 40.0

    def __post_init__(self) -> None:
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 8, got {n}")
        for name in ("Lx", "Ly"):
            if not (np.isfinite(getattr(self, name)) and getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive and finite")
        nx, ny = int(self.nx), int(self.ny)
        object.__setattr__(self, "nx", nx)
        object.__setattr__(self, "ny", ny)
        object.__setattr__(self, "Lx", float(self.Lx))
        object.__setattr__(self, "Ly", float(self.Ly))
        s = object.__setattr__
        s(self, "dx", self.Lx / nx)
        s(self, "dy", self.Ly / ny)
        s(self, "dA", self.dx * self.dy)
        s(self, "area", self.Lx * self.Ly)
        # integer offsets keep the grid exactly mirror-symmetric about 0
        s(self, "x", (np.arange(nx) - nx // 2) * self.dx)
        s(self, "y", (np.arange(ny) - ny // 2) * self.dy)
        s(self, "X", self.x[:, None] * np.ones((1, ny)))
        s(self, "Y", np.ones((nx, 1)) * self.y[None, :])

        mx = _int_freqs(nx)
        my = _int_freqs(ny)
        myr = np.arange(ny // 2 + 1, dtype=float)
        s(self, "mx", mx[:, None])
        s(self, "my", my[None, :])
        s(self, "myr", myr[None, :])
        kx = 2 * np.pi / self.Lx * mx
        ky = 2 * np.pi / self.Ly * my
        kyr = 2 * np.pi / self.Ly * myr
        kx_odd = kx.copy()
        kx_odd[nx // 2] = 0.0
        ky_odd = ky.copy()
        ky_odd[ny // 2] = 0.0
        kyr_odd = kyr.copy()
        kyr_odd[-1] = 0.0
        s(self, "kx", kx[:, None])
        s(self, "ky", ky[None, :])
        s(self, "kyr", kyr[None, :])
        s(self, "kx_odd", kx_odd[:, None])
        s(self, "ky_odd", ky_odd[None, :])
        s(self, "kyr_odd", kyr_odd[None, :])
        s(self, "k2", self.kx**2 + self.ky**2)
        s(self, "k2r", self.kx**2 + self.kyr**2)
        s(self, "kabs", np.sqrt(self.k2))
        s(self, "kodd_abs", np.sqrt(self.kx_odd**2 + self.ky_odd**2))
        s(self, "kodd_abs_r", np.sqrt(self.kx_odd**2 + self.kyr_odd**2))
        keep_x = np.abs(mx)[:, None] <= nx / 3
        s(self, "dealias_mask", keep_x & (np.abs(my)[None, :] <= ny / 3))
        s(self, "dealias_mask_r", keep_x & (myr[None, :] <= ny / 3))
        for name in ("x", "y", "X", "Y", "kx", "ky", "kyr", "kx_odd", "ky_odd",
                     "kyr_odd", "k2", "k2r", "kabs", "kodd_abs", "kodd_abs_r",
                     "dealias_mask", "dealias_mask_r"):
            getattr(self, name).setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def kmax(self) -> float:
        return float(np.sqrt((np.pi / self.dx) ** 2 + (np.pi / self.dy) ** 2))

    def check_same(self, other: "Grid2D") -> None:
        if self != other:
            raise ValueError(f"grid mismatch: {self} vs {other}")

    # -- array-level helpers used by the solvers ---------------------------

    def l2(self, a: np.ndarray) -> float:
        """Discrete L2 norm of a physical array (any leading component axes)."""
        return float(np.sqrt(np.sum(np.abs(a) ** 2) * self.dA))

    def integrate(self, a: np.ndarray) -> float:
        return float(np.sum(a) * self.dA)

    def grad_real(self, a: np.ndarray) -> np.ndarray:
        ah = rfft2(a)
        return np.stack([irfft2(1j * self.kx_odd * ah, self.shape),
                         irfft2(1j * self.kyr_odd * ah, self.shape)])

    def div_real(self, v: np.ndarray) -> np.ndarray:
        vh = rfft2(v)
        return irfft2(1j * self.kx_odd * vh[0] + 1j * self.kyr_odd * vh[1], self.shape)

    def grad_complex(self, a: np.ndarray) -> np.ndarray:
        ah = fft2(a)
        return np.stack([ifft2(1j * self.kx_odd * ah), ifft2(1j * self.ky_odd * ah)])

    def lap_real(self, a: np.ndarray) -> np.ndarray:
        return irfft2(-self.k2r * rfft2(a), self.shape)

    def lap_complex(self, a: np.ndarray) -> np.ndarray:
        return ifft2(-self.k2 * fft2(a))

    def dealias_real(self, a: np.ndarray) -> np.ndarray:
        return irfft2(rfft2(a) * self.dealias_mask_r, self.shape)

    def dealias_complex(self, a: np.ndarray) -> np.ndarray:
        return ifft2(fft2(a) * self.dealias_mask)

    def hs_norm_complex(self, a: np.ndarray, s: float) -> float:
        ah = fft2(a)
        w = (1.0 + self.k2) ** s
        return float(np.sqrt(np.sum(w * np.abs(ah) ** 2) * self.area) / (self.nx * self.ny))


PHYSICAL = "physical"
SPECTRAL = "spectral"


@dataclass(frozen=True)
class Field:
    """Grid samples of a scalar (``values.shape == grid.shape``) or 2-vector
    (``values.shape == (2, *grid.shape)``) field.

    ``real`` records whether the physical-space field is real; spectral
    values are always complex.
    """

    grid: Grid2D
    values: np.ndarray
    space: str = PHYSICAL
    real: bool = True

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.shape[-2:] != self.grid.shape or v.ndim not in (2, 3) or (v.ndim == 3 and v.shape[0] != 2):
            raise ValueError(f"values shape {v.shape} incompatible with grid {self.grid.shape}")
        if self.space not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"unknown representation {self.space!r}")
        if self.space == PHYSICAL and self.real:
            if np.iscomplexobj(v):
                raise ValueError("real physical field must have real storage")
            v = v.astype(float, copy=False)
        elif self.space == SPECTRAL:
            v = v.astype(complex, copy=False)
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("field contains NaN or Inf")
        object.__setattr__(self, "values", v)

    @property
    def rank(self) -> str:
        return "vector2" if self.values.ndim == 3 else "scalar"

    @classmethod
    def from_function(cls, grid: Grid2D, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "Field":
        vals = np.asarray(fn(grid.X, grid.Y))
        return cls(grid, vals, PHYSICAL, real=not np.iscomplexobj(vals))


class ReprError(ValueError):
    """A field was passed in the wrong representation."""


def to_spectral(f: Field) -> Field:
    if f.space != PHYSICAL:
        raise ReprError("to_spectral expects a physical-space field")
    return Field(f.grid, fft2(f.values), SPECTRAL, real=f.real)


def to_physical(f: Field) -> Field:
    if f.space != SPECTRAL:
        raise ReprError("to_physical expects a spectral-space field")
    vals = ifft2(f.values)
    if f.real:
        vals = vals.real
    return Field(f.grid, vals, PHYSICAL, real=f.real)


def _spectral(f: Field) -> Field:
    return f if f.space == SPECTRAL else to_spectral(f)


def apply_multiplier(f: Field, sym: Callable[[np.ndarray, np.ndarray], np.ndarray] | np.ndarray,
                     *, real: bool | None = None) -> Field:
    """Scale every Fourier mode of ``f`` by ``sym(kx, ky)``.

    ``sym`` is either a callable of the full-layout wavenumber tables or a
    precomputed array. Returns a field in the same representation as ``f``.
    A callable returning shape ``(2, nx, ny)`` maps scalars to vectors.
    """
    g = f.grid
    fh = _spectral(f).values
    s = sym(g.kx, g.ky) if callable(sym) else sym
    out = np.asarray(s) * fh
    keep_real = f.real if real is None else real
    res = Field(g, out, SPECTRAL, real=keep_real)
    return res if f.space == SPECTRAL else to_physical(res)


def laplacian(f: Field) -> Field:
    return apply_multiplier(f, -f.grid.k2)


def omega(f: Field) -> Field:
    """Apply (-Laplacian)^(1/2), symbol |k|."""
    return apply_multiplier(f, f.grid.kabs)


def _inv_safe(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    nz = a != 0
    out[nz] = 1.0 / a[nz]
    return out


def inv_omega(f: Field) -> Field:
    """Apply symbol 1/|k| with the zero mode mapped to 0."""
    return apply_multiplier(f, _inv_safe(f.grid.kabs))


def grad(f: Field) -> Field:
    if f.rank != "scalar":
        raise ValueError("grad expects a scalar field")
    g = f.grid
    sym = np.stack(np.broadcast_arrays(1j * g.kx_odd, 1j * g.ky_odd))
    return apply_multiplier(f, sym)


def div(f: Field) -> Field:
    if f.rank != "vector2":
        raise ValueError("div expects a vector field")
    g = f.grid
    fh = _spectral(f).values
    out = Field(g, 1j * g.kx_odd * fh[0] + 1j * g.ky_odd * fh[1], SPECTRAL, real=f.real)
    return out if f.space == SPECTRAL else to_physical(out)


def inv_lap_grad(f: Field) -> Field:
    """Apply Laplacian^-1 grad, symbol -i k / |k|^2, zero mode 0."""
    g = f.grid
    w = _inv_safe(g.kx_odd**2 + g.ky_odd**2)
    sym = np.stack(np.broadcast_arrays(-1j * g.kx_odd * w, -1j * g.ky_odd * w))
    return apply_multiplier(f, sym)


def dealias(f: Field) -> Field:
    """Zero every mode with |m_j| > n_j/3 (2/3 rule)."""
    if f.space != SPECTRAL:
        raise ReprError("dealias expects a spectral-space field")
    return Field(f.grid, f.values * f.grid.dealias_mask, SPECTRAL, real=f.real)


def sobolev_norm(f: Field, s: float) -> float:
    """Discrete H^s norm with weight <k>^(2s) = (1 + |k|^2)^s."""
    if not np.isfinite(s):
        raise ValueError("Sobolev index must be finite")
    g = f.grid
    fh = _spectral(f).values
    w = (1.0 + g.k2) ** s
    total = np.sum(w * np.abs(fh) ** 2)
    return float(np.sqrt(total * g.area) / (g.nx * g.ny))


def l2_norm(f: Field) -> float:
    if f.space == PHYSICAL:
        return f.grid.l2(f.values)
    return sobolev_norm(f, 0.0)


def with_values(f: Field, values: np.ndarray) -> Field:
    return replace(f, values=values)
