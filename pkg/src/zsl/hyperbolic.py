"""Symmetric-hyperbolic reformulation of the perturbed Zakharov system.

The perturbation is carried as the 9-component field

    U = (P, V1, V2, F, G, H1, H2, L1, L2)

in the ungauged frame around phi = e^{it} Q, phi1 = -Q^2, where
sqrt(2) u4 = F + iG, sqrt(2) grad u4 = H + iL, P = n + |u4|^2 + 2 Re(conj(u4) phi)
and V = -(1/lam) Lap^-1 grad n_t. It satisfies

    U_t + sum_j (A^j(U) + B^j(phi) + lam C^j) d_j U + (D1(U) + D2(phi)) U = K Lap U

with A^j, B^j, C^j symmetric and K antisymmetric. ``system_residual``
evaluates that matrix form; ``direct_residual`` evaluates the component
equations with the residual terms written out, and the two must agree.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .soliton import SQRT2, Background, background_components
from .solver import ZakharovState
from .spectral import Field, Grid2D, fft2, ifft2, irfft2, rfft2

IP, IV1, IV2, IF, IG, IH1, IH2, IL1, IL2 = range(9)
IV = (IV1, IV2)
IH = (IH1, IH2)
IL = (IL1, IL2)
NCOMP = 9
NAMES = ("P", "V1", "V2", "F", "G", "H1", "H2", "L1", "L2")


@dataclass(frozen=True, eq=False)
class HyperbolicState:
    grid: Grid2D
    t: float
    U: np.ndarray  # (9, nx, ny)

    def __post_init__(self) -> None:
        if self.U.shape != (NCOMP,) + self.grid.shape:
            raise ValueError(f"expected {NCOMP} components on the grid, got {self.U.shape}")

    P = property(lambda self: self.U[IP])
    V = property(lambda self: self.U[[IV1, IV2]])
    F = property(lambda self: self.U[IF])
    G = property(lambda self: self.U[IG])
    H = property(lambda self: self.U[[IH1, IH2]])
    L = property(lambda self: self.U[[IL1, IL2]])


def build_U(state: ZakharovState, bg: Background, lam: float) -> HyperbolicState:
    """Hyperbolic variables of a Zakharov state (gauged-frame u, time t)."""
    g = state.grid
    g.check_same(bg.grid)
    t = state.t
    u4 = np.exp(1j * t) * state.u
    phi = bg.phi(t)
    P = state.n + np.abs(u4) ** 2 + 2.0 * (np.conj(u4) * phi).real
    # V = -(1/lam) Lap^-1 grad n_t with n_t = lam^2 div v
    vh = rfft2(state.v)
    div_h = 1j * (g.kx_odd * vh[0] + g.kyr_odd * vh[1])
    k2 = g.kx_odd ** 2 + g.kyr_odd ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(k2 > 0, 1.0 / k2, 0.0)
    Vh = -lam * (-1j) * w * div_h
    V = np.stack([irfft2(g.kx_odd * Vh, g.shape), irfft2(g.kyr_odd * Vh, g.shape)])
    gu = g.grad_complex(u4)
    U = np.empty((NCOMP,) + g.shape)
    U[IP] = P
    U[IV1], U[IV2] = V
    U[IF] = SQRT2 * u4.real
    U[IG] = SQRT2 * u4.imag
    U[IH1], U[IH2] = SQRT2 * gu.real
    U[IL1], U[IL2] = SQRT2 * gu.imag
    return HyperbolicState(g, t, U)


def w_constraint(hs: HyperbolicState) -> float:
    """L2 norm of W = (grad F - H, grad G - L)."""
    g = hs.grid
    gF = g.grad_real(hs.F)
    gG = g.grad_real(hs.G)
    return g.l2(np.concatenate([gF - hs.H, gG - hs.L]))


def background_nodes(bg: Background, t: float) -> dict[str, np.ndarray]:
    """Background values entering B^j and D2 at every grid node."""
    c = background_components(bg, t)
    g = bg.grid
    return {
        "Fr": c["F_r"], "Gr": c["G_r"],
        "Hr1": c["H_r"][0], "Hr2": c["H_r"][1],
        "Lr1": c["L_r"][0], "Lr2": c["L_r"][1],
        "Pr": c["P_r"],
        "divHr": g.div_real(c["H_r"]),
        "divLr": g.div_real(c["L_r"]),
    }


@dataclass(frozen=True)
class CoeffMatrices:
    A1: np.ndarray
    A2: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    K: np.ndarray
    D1: np.ndarray
    D2: np.ndarray


def _C_K() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    C1 = np.zeros((NCOMP, NCOMP))
    C2 = np.zeros((NCOMP, NCOMP))
    C1[IP, IV1] = C1[IV1, IP] = 1.0
    C2[IP, IV2] = C2[IV2, IP] = 1.0
    K = np.zeros((NCOMP, NCOMP))
    K[IF, IG], K[IG, IF] = -1.0, 1.0
    for h, l in zip(IH, IL):
        K[h, l], K[l, h] = -1.0, 1.0
    return C1, C2, K


C1, C2, K = _C_K()
for _m in (C1, C2, K):
    _m.setflags(write=False)


def _flux_matrix(a: np.ndarray, b: np.ndarray, j: int) -> np.ndarray:
    """Pattern shared by A^j(U) (a=G, b=F) and B^j(phi) (a=G_r, b=F_r)."""
    M = np.zeros((NCOMP, NCOMP) + np.shape(a))
    M[IP, IH[j]] = M[IH[j], IP] = -a
    M[IP, IL[j]] = M[IL[j], IP] = b
    return M


def coefficient_matrices(U: np.ndarray, bgn: dict[str, np.ndarray]) -> CoeffMatrices:
    """All coefficient matrices at every node; ``U`` is (9, ...) and the
    matrices are (9, 9, ...). Works for a single node (U of shape (9,))."""
    P, F, G = U[IP], U[IF], U[IG]
    H = (U[IH1], U[IH2])
    L = (U[IL1], U[IL2])
    Fr, Gr, Pr = bgn["Fr"], bgn["Gr"], bgn["Pr"]
    Hr = (bgn["Hr1"], bgn["Hr2"])
    Lr = (bgn["Lr1"], bgn["Lr2"])
    shape = np.broadcast(P, Fr).shape

    A1 = _flux_matrix(G, F, 0)
    A2 = _flux_matrix(G, F, 1)
    B1 = _flux_matrix(np.broadcast_to(Gr, shape), np.broadcast_to(Fr, shape), 0)
    B2 = _flux_matrix(np.broadcast_to(Gr, shape), np.broadcast_to(Fr, shape), 1)

    S = F * F + G * G
    X = F * Fr + G * Gr
    Sr = Fr * Fr + Gr * Gr
    D1 = np.zeros((NCOMP, NCOMP) + shape)
    D2 = np.zeros((NCOMP, NCOMP) + shape)

    # P row: F div L_r - G div H_r
    D2[IP, IF] = bgn["divLr"]
    D2[IP, IG] = -bgn["divHr"]

    # F row
    D1[IF, IF] = 0.5 * F * Gr
    D1[IF, IG] = 0.5 * S + X - P + 0.5 * G * Gr
    D2[IF, IF] = Fr * Gr
    D2[IF, IG] = 0.5 * Sr + Gr * Gr - Pr
    D2[IF, IP] = -Gr

    # G row
    D1[IG, IF] = -(0.5 * S + X) - 0.5 * F * Fr + P
    D1[IG, IG] = -0.5 * G * Fr
    D2[IG, IF] = -0.5 * Sr - Fr * Fr + Pr
    D2[IG, IG] = -Gr * Fr
    D2[IG, IP] = Fr

    for i in range(2):
        h, l = IH[i], IL[i]
        dM = F * H[i] + G * L[i] + F * Hr[i] + Fr * H[i] + G * Lr[i] + Gr * L[i]
        Mr = Fr * Hr[i] + Gr * Lr[i]

        # H_i row
        D1[h, l] += 0.5 * S + X + G * Gr - P
        D1[h, F_ := IF] += 0.5 * F * Lr[i]
        D1[h, IG] += 0.5 * G * Lr[i] + dM
        D1[h, h] += F * Gr
        D2[h, l] += 0.5 * Sr + Gr * Gr - Pr
        D2[h, F_] += Fr * Lr[i] + Hr[i] * Gr
        D2[h, IG] += Gr * Lr[i] + Mr + Lr[i] * Gr
        D2[h, h] += Fr * Gr
        D2[h, IP] += -Lr[i]

        # L_i row
        D1[l, h] += -(0.5 * S + X) - F * Fr + P
        D1[l, IF] += -0.5 * F * Hr[i] - dM
        D1[l, IG] += -0.5 * G * Hr[i]
        D1[l, l] += -G * Fr
        D2[l, h] += -0.5 * Sr - Fr * Fr + Pr
        D2[l, IF] += -Fr * Hr[i] - Mr - Hr[i] * Fr
        D2[l, IG] += -Gr * Hr[i] - Lr[i] * Fr
        D2[l, l] += -Gr * Fr
        D2[l, IP] += Hr[i]

    return CoeffMatrices(A1, A2, B1, B2, C1, C2, K, D1, D2)


def matrices(U, bg: Background, t: float, node: tuple[int, int]) -> CoeffMatrices:
    """Coefficient matrices at one grid node ``(ix, iy)``.

    ``U`` is a :class:`HyperbolicState` or a length-9 vector of node values.
    """
    vec = U.U[(slice(None),) + tuple(node)] if isinstance(U, HyperbolicState) else np.asarray(U, float)
    bgn = {k: np.asarray(v[node]) for k, v in background_nodes(bg, t).items()}
    return coefficient_matrices(vec, bgn)


# -- residuals ----------------------------------------------------------------


def _derivs(g: Grid2D, U: np.ndarray):
    Uh = rfft2(U)
    dx = irfft2(1j * g.kx_odd * Uh, g.shape)
    dy = irfft2(1j * g.kyr_odd * Uh, g.shape)
    lap = irfft2(-g.k2r * Uh, g.shape)
    return dx, dy, lap


def matrix_residual(U: np.ndarray, Ut: np.ndarray, g: Grid2D, bgn: dict, lam: float) -> np.ndarray:
    """Pointwise residual of the matrix form, shape (9, nx, ny)."""
    dx, dy, lap = _derivs(g, U)
    m = coefficient_matrices(U, bgn)
    r = Ut.copy()
    r += np.einsum("ij...,j...->i...", m.A1 + m.B1, dx)
    r += np.einsum("ij...,j...->i...", m.A2 + m.B2, dy)
    r += lam * (np.einsum("ij,j...->i...", m.C1, dx) + np.einsum("ij,j...->i...", m.C2, dy))
    r += np.einsum("ij...,j...->i...", m.D1 + m.D2, U)
    r -= np.einsum("ij,j...->i...", m.K, lap)
    return r


def direct_residual(U: np.ndarray, Ut: np.ndarray, g: Grid2D, bgn: dict, lam: float) -> np.ndarray:
    """Pointwise residual of the component equations written out term by term (R1..R5)."""
    dx, dy, lap = _derivs(g, U)
    P, F, G = U[IP], U[IF], U[IG]
    H = U[[IH1, IH2]]
    L = U[[IL1, IL2]]
    Fr, Gr, Pr = bgn["Fr"], bgn["Gr"], bgn["Pr"]
    Hr = np.stack([bgn["Hr1"], bgn["Hr2"]])
    Lr = np.stack([bgn["Lr1"], bgn["Lr2"]])
    Ft, Gt = F + Fr, G + Gr
    Ht, Lt = H + Hr, L + Lr
    Pt = P + Pr
    divV = dx[IV1] + dy[IV2]
    divH = dx[IH1] + dy[IH2]
    divL = dx[IL1] + dy[IL2]
    gradP = np.stack([dx[IP], dy[IP]])
    dS = F ** 2 + G ** 2 + 2 * F * Fr + 2 * G * Gr
    St = Ft ** 2 + Gt ** 2
    Mt = Ft * Ht + Gt * Lt
    dM = F * H + G * L + F * Hr + Fr * H + G * Lr + Gr * L

    R1 = F * bgn["divLr"] - G * bgn["divHr"]
    R2 = 0.5 * St * G + 0.5 * dS * Gr - Pt * G - P * Gr
    R3 = -0.5 * St * F - 0.5 * dS * Fr + Pt * F + P * Fr
    R4 = 0.5 * St * L + 0.5 * dS * Lr + Mt * G + dM * Gr - P * Lr - Pr * L - P * L
    R5 = -0.5 * St * H - 0.5 * dS * Hr - Mt * F - dM * Fr + P * H + Pr * H + P * Hr

    r = np.empty_like(U)
    r[IP] = Ut[IP] + lam * divV + Ft * divL - Gt * divH + R1
    r[IV1] = Ut[IV1] + lam * gradP[0]
    r[IV2] = Ut[IV2] + lam * gradP[1]
    r[IF] = Ut[IF] + R2 + lap[IG]
    r[IG] = Ut[IG] + R3 - lap[IF]
    r[[IH1, IH2]] = Ut[[IH1, IH2]] - Gt * gradP + R4 + lap[[IL1, IL2]]
    r[[IL1, IL2]] = Ut[[IL1, IL2]] + Ft * gradP + R5 - lap[[IH1, IH2]]
    return r


def system_residual(prev: HyperbolicState, mid: HyperbolicState, nxt: HyperbolicState,
                    bg: Background, lam: float) -> float:
    """L2 norm of the matrix-form residual at ``mid.t`` with a central
    difference for U_t."""
    dt_b = mid.t - prev.t
    dt_f = nxt.t - mid.t
    if not (dt_b > 0 and abs(dt_f - dt_b) <= 1e-9 * max(dt_b, 1.0)):
        raise ValueError("snapshots must be equally spaced in time")
    Ut = (nxt.U - prev.U) / (dt_f + dt_b)
    r = matrix_residual(mid.U, Ut, mid.grid, background_nodes(bg, mid.t), lam)
    return mid.grid.l2(r)


# -- mollifier ----------------------------------------------------------------


class UnderResolvedKernel(UserWarning):
    pass


def bump(r2: np.ndarray) -> np.ndarray:
    """C-infinity bump exp(-1/(1 - |X|^2)) supported in |X| < 1 (unnormalized)."""
    out = np.zeros_like(r2, dtype=float)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


def mollifier_symbol(g: Grid2D, eps: float) -> np.ndarray:
    """Discrete Fourier transform of the sampled, unit-mass kernel j_eps."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps < max(g.dx, g.dy):
        warnings.warn(f"eps={eps:g} below grid spacing; kernel under-resolved",
                      UnderResolvedKernel, stacklevel=3)
    # kernel centred on the origin node, shifted so index 0 is X = 0
    k = bump((g.X ** 2 + g.Y ** 2) / eps ** 2)
    k = np.fft.ifftshift(k)
    k /= k.sum() * g.dA
    return fft2(k) * g.dA


def mollify(f: Field, eps: float) -> Field:
    """Convolution with j_eps(X) = eps^-2 j(X/eps), computed spectrally."""
    g = f.grid
    sym = mollifier_symbol(g, eps)
    if f.space == "spectral":
        return Field(g, f.values * sym, "spectral", real=f.real)
    out = ifft2(fft2(f.values) * sym)
    return Field(g, out.real if f.real else out, "physical", real=f.real)
