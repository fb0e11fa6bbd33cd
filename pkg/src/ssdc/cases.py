"""Test problems: isentropic vortex, manufactured solution, Taylor-Green vortex,
decaying compressible isotropic turbulence and a free-stream check."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .gas import GasModel, conserved, conserved_from_pressure
from .mesh import Grid, build_cartesian, build_warped
from .sbp import ConfigurationError

# --------------------------------------------------------------------------
# isentropic vortex


@dataclass(frozen=True)
class VortexParams:
    gamma: float = 1.4
    mach: float = 0.5
    beta: float = 5.0
    T_inf: float = 1.0
    lo: float = 0.0
    hi: float = 10.0
    axis: tuple = (1.0, 1.0, 1.0)
    center: tuple = (5.0, 5.0, 5.0)
    t_final: float = 2.5
    translation_speed: Optional[float] = None   # None: Ma_inf * c_inf

    def gas(self):
        # R chosen so that the vortex profile balances with unit velocity scale
        return GasModel(gamma=self.gamma, R=1.0 / (self.gamma * self.mach**2))

    def velocity(self):
        g = self.gas()
        speed = (self.mach * math.sqrt(g.gamma * g.R * self.T_inf)
                 if self.translation_speed is None else self.translation_speed)
        a = np.asarray(self.axis, dtype=float)
        return speed * a / np.linalg.norm(a)


def vortex_frame(axis):
    """Orthonormal (a, b1, b2): a along the axis, b1 by Gram-Schmidt of e1 against a."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    e1 = np.array([1.0, 0.0, 0.0])
    b1 = e1 - (e1 @ a) * a
    if np.linalg.norm(b1) < 1e-12:
        e1 = np.array([0.0, 1.0, 0.0])
        b1 = e1 - (e1 @ a) * a
    b1 /= np.linalg.norm(b1)
    return a, b1, np.cross(a, b1)


def vortex_exact(x, t, params: VortexParams = VortexParams()):
    """Primitive state (rho, U, T) of the translating vortex at time t."""
    x = np.asarray(x, dtype=float)
    a, b1, b2 = vortex_frame(params.axis)
    V = params.velocity()
    shape = (3,) + (1,) * (x.ndim - 1)
    d = x - (np.asarray(params.center, float) + V * t).reshape(shape)
    s1 = np.tensordot(b1, d, axes=1)
    s2 = np.tensordot(b2, d, axes=1)
    r2 = s1 * s1 + s2 * s2
    g = params.gamma
    T = params.T_inf - (g - 1.0) * params.mach**2 * params.beta**2 / (8 * np.pi**2) * np.exp(1 - r2)
    rho = T ** (1.0 / (g - 1.0))
    # U_t / r, so the tangential field is (U_t / r) (a x d_perp)
    ut_r = params.beta / (2 * np.pi) * np.exp(0.5 * (1 - r2))
    U = (V.reshape(shape) + ut_r * (s1 * b2.reshape(shape) - s2 * b1.reshape(shape)))
    return rho, U, T


# --------------------------------------------------------------------------
# manufactured solution

# rows: rho, U1, U2, U3, P; columns: phi0, phi_x1, phi_x2, phi_x3, a_x1, a_x2, a_x3
MMS_TABLE = np.array([
    [1.0, 3 / 20, -1 / 10, 1 / 5, 1.0, 1 / 2, 1.0],
    [800.0, 50.0, -30.0, 50.0, 3 / 2, 3 / 5, 1.0],
    [800.0, -75.0, 40.0, 10.0, 1 / 2, 3 / 2, 3 / 2],
    [800.0, 15.0, -25.0, 20.0, 3 / 2, 1 / 2, 5 / 4],
    [1e5, 2e4, 5e4, 2 / 3, 1.0, 3 / 2, 1.0],
])
# which trig function multiplies each amplitude (True = sin, False = cos)
MMS_SIN = np.array([
    [True, False, True],
    [True, False, False],
    [False, True, True],
    [True, True, False],
    [True, True, False],
])


@dataclass(frozen=True)
class MmsParams:
    table: tuple = tuple(map(tuple, MMS_TABLE))
    L: float = 1.0
    gamma: float = 1.4
    R: float = 1.0
    reynolds: float = 4e6
    prandtl: float = 0.71
    lo: float = 0.0
    hi: float = 1.0
    t_final: float = 0.004      # about three flow-through times; the error has plateaued

    @property
    def constants(self):
        return np.asarray(self.table, dtype=float)

    @property
    def mach(self):
        """Reference Mach number U0 / sqrt(gamma P0 / rho0)."""
        c = self.constants
        return c[1, 0] / math.sqrt(self.gamma * c[4, 0] / c[0, 0])

    def gas(self):
        c = self.constants
        mu = c[0, 0] * c[1, 0] * self.L / self.reynolds
        return GasModel(gamma=self.gamma, R=self.R, mu=mu, Pr=self.prandtl)


def _mms_fields(x, params: MmsParams):
    """Values, gradients and (diagonal) second derivatives of rho, U1..3, P.

    Each field is a sum of one-dimensional sinusoids, so mixed second
    derivatives vanish.  Shapes: (5, ...), (5, 3, ...), (5, 3, ...).
    """
    x = np.asarray(x, dtype=float)
    c = params.constants
    val = np.empty((5,) + x.shape[1:])
    grad = np.empty((5, 3) + x.shape[1:])
    hess = np.empty((5, 3) + x.shape[1:])
    for f in range(5):
        val[f] = c[f, 0]
        for d in range(3):
            k = c[f, 4 + d] * np.pi / params.L
            amp = c[f, 1 + d]
            arg = k * x[d]
            if MMS_SIN[f, d]:
                val[f] += amp * np.sin(arg)
                grad[f, d] = amp * k * np.cos(arg)
                hess[f, d] = -amp * k * k * np.sin(arg)
            else:
                val[f] += amp * np.cos(arg)
                grad[f, d] = -amp * k * np.sin(arg)
                hess[f, d] = -amp * k * k * np.cos(arg)
    return val, grad, hess


def mms_exact(x, params: MmsParams = MmsParams()):
    """Primitive state (rho, U, P)."""
    val, _, _ = _mms_fields(x, params)
    return val[0], val[1:4], val[4]


def mms_conserved(x, params: MmsParams = MmsParams(), gas: GasModel | None = None):
    rho, U, P = mms_exact(x, params)
    return conserved_from_pressure(rho, U, P, gas or params.gas())


def mms_source(x, params: MmsParams = MmsParams(), gas: GasModel | None = None):
    """Residual of the steady compressible Navier-Stokes operator on the exact fields."""
    gas = gas or params.gas()
    val, grad, hess = _mms_fields(x, params)
    g, R, mu, kappa = gas.gamma, gas.R, gas.mu, gas.conductivity
    rho, U, P = val[0], val[1:4], val[4]
    drho, dU, dP = grad[0], grad[1:4], grad[4]        # dU[i, j] = dU_i/dx_j
    h_rho, hU, hP = hess[0], hess[1:4], hess[4]
    q2 = np.sum(U * U, axis=0)
    E = P / (g - 1) + 0.5 * rho * q2
    div_u = dU[0, 0] + dU[1, 1] + dU[2, 2]
    S = np.zeros((5,) + rho.shape)
    # inviscid divergence
    S[0] = sum(drho[m] * U[m] for m in range(3)) + rho * div_u
    for i in range(3):
        # d/dx_m (rho U_i U_m) = U_i d(rho U_m)/dx_m + rho U_m dU_i/dx_m
        S[1 + i] = U[i] * S[0] + sum(rho * U[m] * dU[i, m] for m in range(3)) + dP[i]
    for m in range(3):
        dE = dP[m] / (g - 1) + 0.5 * drho[m] * q2 + rho * sum(U[k] * dU[k, m] for k in range(3))
        S[4] += dU[m, m] * (E + P) + U[m] * (dE + dP[m])
    # viscous divergence (mixed second derivatives are zero)
    tau = np.empty((3, 3) + rho.shape)
    for i in range(3):
        for j in range(3):
            tau[i, j] = mu * (dU[i, j] + dU[j, i] - (2.0 / 3.0) * (i == j) * div_u)
    div_tau = np.empty((3,) + rho.shape)
    for i in range(3):
        div_tau[i] = mu * (hU[i].sum(axis=0) + hU[i, i] / 3.0)
        S[1 + i] -= div_tau[i]
    lap_T = np.zeros_like(rho)
    for j in range(3):
        lap_T += (hP[j] / (R * rho) - 2 * dP[j] * drho[j] / (R * rho**2)
                  - P * h_rho[j] / (R * rho**2) + 2 * P * drho[j]**2 / (R * rho**3))
    work = sum(dU[i, j] * tau[i, j] for i in range(3) for j in range(3))
    S[4] -= work + sum(U[i] * div_tau[i] for i in range(3)) + kappa * lap_T
    return S


# --------------------------------------------------------------------------
# Taylor-Green vortex


@dataclass(frozen=True)
class TgvParams:
    reynolds: float = 1600.0
    mach: float = 0.05
    gamma: float = 1.4
    prandtl: float = 0.71
    lo: float = -np.pi
    hi: float = np.pi
    t_final: float = 20.0

    def gas(self):
        return GasModel(gamma=self.gamma, R=1.0 / (self.gamma * self.mach**2),
                        mu=1.0 / self.reynolds, Pr=self.prandtl)


def tgv_initial(x, params: TgvParams = TgvParams()):
    """Primitive state (rho, U, T)."""
    x1, x2, x3 = np.asarray(x, dtype=float)
    rho = 1.0 + params.gamma * params.mach**2 / 16.0 * (
        (np.cos(2 * x1) + np.cos(2 * x2)) * (np.cos(2 * x3) + 2.0))
    U = np.stack([np.sin(x1) * np.cos(x2) * np.cos(x3),
                  -np.cos(x1) * np.sin(x2) * np.cos(x3),
                  np.zeros_like(x1)])
    return rho, U, np.ones_like(x1)


# --------------------------------------------------------------------------
# compressible homogeneous isotropic turbulence


@dataclass(frozen=True)
class ChitParams:
    A0: float = 0.00013
    k0: float = 8.0
    mach_t: float = 0.62
    re_lambda: float = 194.0
    gamma: float = 1.4
    prandtl: float = 0.71
    lo: float = 0.0
    hi: float = 2 * np.pi
    n_fourier: int = 32          # synthesis modes per direction, |k_i| <= n/2
    seed: int = 0
    turnovers: float = 3.0       # t_final in units of tau

    def spectrum(self, k):
        k = np.asarray(k, dtype=float)
        return self.A0 * k**4 * np.exp(-2.0 * k**2 / self.k0**2)

    @property
    def integral_scale(self):
        """L1 = (3 pi / 4) int E/k / int E, in closed form sqrt(2 pi)/k0."""
        return math.sqrt(2 * math.pi) / self.k0

    @property
    def u_rms_model(self):
        a = 2.0 / self.k0**2
        energy = self.A0 * 3 * math.sqrt(math.pi) / (8 * a**2.5)
        return math.sqrt(2.0 * energy / 3.0)

    @property
    def tau(self):
        return self.integral_scale / self.u_rms_model


def chit_modes(params: ChitParams, seed=None):
    """Integer wavevectors k (M, 3) and complex solenoidal amplitudes (M, 3).

    Modes come in conjugate pairs so the synthesized field is real; the shell
    sum of |u_hat|^2 / 2 over both halves equals E(s) for every shell s.
    """
    n = params.n_fourier
    kmax = n // 2
    if kmax < params.k0:
        raise ConfigurationError(
            f"synthesis size n_fourier={n} resolves |k_i| <= {kmax} < k0={params.k0}")
    rng = np.random.default_rng(params.seed if seed is None else seed)
    r = np.arange(-kmax, kmax + 1)
    K = np.stack(np.meshgrid(r, r, r, indexing="ij"), -1).reshape(-1, 3)
    # half space: first nonzero component positive
    key = K[:, 0] * (n + 1) ** 2 + K[:, 1] * (n + 1) + K[:, 2]
    half = K[key > 0]
    kk = np.linalg.norm(half, axis=1)
    keep = kk <= kmax
    half, kk = half[keep], kk[keep]
    # shell-normalised amplitudes: the modes of integer shell s (|k| rounded)
    # share E(s) equally, so the shell-summed spectrum is E(k) exactly
    shell = np.rint(kk).astype(int)
    count = np.bincount(shell)
    amp = np.sqrt(params.spectrum(shell) / count[shell])
    # random direction in the plane normal to k, random phases
    e1 = np.cross(half, np.where(np.abs(half[:, :1]) < np.abs(half[:, 2:]),
                                 [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]))
    e1 = e1 / np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(half / kk[:, None], e1)
    psi = rng.uniform(0, 2 * np.pi, len(kk))
    ph1 = rng.uniform(0, 2 * np.pi, len(kk))
    ph2 = rng.uniform(0, 2 * np.pi, len(kk))
    u_hat = amp[:, None] * (np.cos(psi)[:, None] * np.exp(1j * ph1)[:, None] * e1
                            + np.sin(psi)[:, None] * np.exp(1j * ph2)[:, None] * e2)
    # exact projection onto the divergence-free subspace
    u_hat -= half * (np.sum(half * u_hat, axis=1) / kk**2)[:, None]
    return np.concatenate([half, -half]), np.concatenate([u_hat, np.conj(u_hat)])


def spectral_divergence(k, u_hat):
    return float(np.max(np.abs(np.sum(k * u_hat, axis=1))))


def synthesize_velocity(grid: Grid, k, u_hat, lo=0.0, hi=2 * np.pi):
    """Evaluate sum_k u_hat e^{i k.x} exactly at the grid nodes.

    The grid must be Cartesian, so each coordinate depends on one index
    direction only and the sum factorises into three 1-D transforms.
    """
    x = grid.x
    scale = 2 * np.pi / (hi - lo)
    n = grid.op.n
    U = np.zeros((3,) + grid.J.shape)
    lines = []
    for d in range(3):
        idx = [0] * 6
        idx[d] = slice(None)
        idx[3 + d] = slice(None)
        lines.append(((x[d][tuple(idx)] - lo) * scale).reshape(-1))   # (K_d * n,)
    # group modes by (k1, k2, k3) so the transform is a dense tensor contraction
    kr = np.arange(k.min(), k.max() + 1)
    coeff = np.zeros((3, len(kr), len(kr), len(kr)), dtype=complex)
    off = -kr[0]
    coeff[:, k[:, 0] + off, k[:, 1] + off, k[:, 2] + off] = u_hat.T
    E = [np.exp(1j * np.outer(line, kr)) for line in lines]
    field = np.einsum("cabd,ia,jb,kd->cijk", coeff, E[0], E[1], E[2], optimize=True).real
    K = grid.K
    field = field.reshape(3, K[0], n, K[1], n, K[2], n).transpose(0, 1, 3, 5, 2, 4, 6)
    U[:] = field
    return U


def chit_velocity_gradient_mean(k, u_hat):
    """<sum_i (dU_i/dx_i)^2> of the synthesized field, exactly (Parseval)."""
    return float(np.sum(np.abs(k * u_hat) ** 2).real)


# --------------------------------------------------------------------------
# problem assembly


@dataclass
class CaseSetup:
    name: str
    grid: Grid
    gas: GasModel
    q0: np.ndarray
    t_final: float
    viscous: bool
    boundary: Optional[Callable] = None
    source: Optional[Callable] = None
    exact: Optional[Callable] = None       # (x, t) -> conserved state
    info: dict = field(default_factory=dict)


def setup_vortex(p, K, params: VortexParams = VortexParams()):
    gas = params.gas()
    grid = build_cartesian([params.lo] * 3, [params.hi] * 3, K, p, periodic=False)

    def exact(x, t):
        rho, U, T = vortex_exact(x, t, params)
        return conserved(rho, U, T, gas)

    return CaseSetup("vortex", grid, gas, exact(grid.x, 0.0), params.t_final, False,
                     boundary=exact, exact=exact,
                     info={"translation_velocity": params.velocity().tolist()})


def setup_mms(p, K, params: MmsParams = MmsParams(), viscous=True):
    gas = params.gas()
    if not viscous:
        gas = GasModel(gamma=gas.gamma, R=gas.R)
    grid = build_cartesian([params.lo] * 3, [params.hi] * 3, K, p, periodic=False)
    exact = lambda x, t: mms_conserved(x, params, gas)
    source = lambda x, t: mms_source(x, params, gas)
    return CaseSetup("mms", grid, gas, exact(grid.x, 0.0), params.t_final, viscous,
                     boundary=exact, source=source, exact=exact,
                     info={"mach_reference": params.mach, "mu": gas.mu})


def setup_tgv(p, K, params: TgvParams = TgvParams(), viscous=True):
    gas = params.gas()
    if not viscous:
        gas = GasModel(gamma=gas.gamma, R=gas.R)
    grid = build_cartesian([params.lo] * 3, [params.hi] * 3, K, p, periodic=True)
    rho, U, T = tgv_initial(grid.x, params)
    return CaseSetup("tgv", grid, gas, conserved(rho, U, T, gas), params.t_final, viscous)


def setup_chit(p, K, params: ChitParams = ChitParams(), viscous=True):
    from .diagnostics import turbulence_stats

    grid = build_cartesian([params.lo] * 3, [params.hi] * 3, K, p, periodic=True)
    k, u_hat = chit_modes(params)
    U = synthesize_velocity(grid, k, u_hat, params.lo, params.hi)
    rho = np.ones(grid.J.shape)
    T = np.ones(grid.J.shape)
    # uniform thermodynamics; the sound speed fixes Ma_t on the realized field
    probe = GasModel(gamma=params.gamma, R=1.0)
    stats = turbulence_stats(conserved(rho, U, T, probe), grid, probe)
    c = stats.u_rms / params.mach_t
    R = c * c / (params.gamma * 1.0)
    gas0 = GasModel(gamma=params.gamma, R=R)
    q0 = conserved(rho, U, T, gas0)
    stats = turbulence_stats(q0, grid, gas0)
    mu = stats.rho_mean * stats.u_rms * stats.taylor_lambda / params.re_lambda
    if not math.isfinite(mu) or mu <= 0:
        raise ConfigurationError("CHIT field has no resolved velocity gradients")
    gas = GasModel(gamma=params.gamma, R=R, mu=mu if viscous else 0.0, Pr=params.prandtl)
    tau = params.integral_scale / stats.u_rms
    info = {"u_rms": stats.u_rms, "mach_t": stats.u_rms / c, "mu": mu,
            "taylor_lambda": stats.taylor_lambda, "re_lambda": params.re_lambda,
            "tau": tau, "L1": params.integral_scale,
            "spectral_divergence": spectral_divergence(k, u_hat), "seed": params.seed}
    return CaseSetup("chit", grid, gas, q0, params.turnovers * tau, viscous, info=info)


@dataclass(frozen=True)
class FreestreamParams:
    rho: float = 1.0
    velocity: tuple = (0.3, -0.2, 0.1)
    T: float = 1.0
    warp: float = 0.08
    t_final: float = 1.0


def setup_freestream(p, K, params: FreestreamParams = FreestreamParams()):
    gas = GasModel(gamma=1.4, R=1.0)
    grid = build_warped([0.0] * 3, [1.0] * 3, K, p, params.warp, periodic=True)
    shape = grid.J.shape
    U = np.stack([np.full(shape, v) for v in params.velocity])
    q0 = conserved(np.full(shape, params.rho), U, np.full(shape, params.T), gas)
    exact = lambda x, t: np.broadcast_to(q0[(slice(None),) + (0,) * (q0.ndim - 1)].reshape(
        (5,) + (1,) * (x.ndim - 1)), (5,) + x.shape[1:]).copy()
    return CaseSetup("freestream", grid, gas, q0, params.t_final, False, exact=exact)


CASES = {"vortex": setup_vortex, "mms": setup_mms, "tgv": setup_tgv,
         "chit": setup_chit, "freestream": setup_freestream}
