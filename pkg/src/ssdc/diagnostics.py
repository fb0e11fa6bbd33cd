"""Quadrature-consistent norms and monitored flow quantities.

Every global sum is reduced per element first and then merged in fixed
element order with compensated summation, so results do not depend on how
the element work was scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gas import GasModel, entropy_function, entropy_variables, primitives, sound_speed
from .mesh import Grid


def ordered_sum(a):
    """Sum of *a* with shape (K1, K2, K3, N, N, N): per-element partials merged
    in lexicographic element order by math.fsum."""
    a = np.asarray(a, dtype=float)
    partial = a.reshape(a.shape[:3] + (-1,)).sum(axis=-1)
    return math.fsum(partial.reshape(-1).tolist())


def integrate(grid: Grid, f):
    """Quadrature of a scalar nodal field over the domain."""
    return ordered_sum(grid.weights * f)


def volume_mean(grid: Grid, f):
    return integrate(grid, f) / integrate(grid, np.ones(grid.J.shape))


def m_norm_error(q, exact, grid: Grid):
    """sqrt(sum w J (q - exact)^2) for each of the leading components."""
    diff = np.asarray(q, dtype=float) - np.asarray(exact, dtype=float)
    w = grid.weights
    return np.array([math.sqrt(ordered_sum(w * d * d)) for d in diff])


def entropy_rate(q, jrhs, grid: Grid, gas: GasModel):
    """sum_nodes w W(q)^T (J dq/dt); *jrhs* already carries J."""
    W = entropy_variables(q, gas)
    return ordered_sum(grid.op.mass * np.sum(W * jrhs, axis=0))


def total_entropy(q, grid: Grid, gas: GasModel):
    return integrate(grid, entropy_function(q, gas))


def kinetic_energy(q, grid: Grid, gas: GasModel):
    """E_K = <rho U.U> / 2 (volume mean)."""
    rho, U, _, _, _ = primitives(q, gas, check=False)
    return 0.5 * volume_mean(grid, rho * np.sum(U * U, axis=0))


def physical_gradient(grid: Grid, f):
    """df/dx_m for m = 1..3 by the chain rule with the stored metrics."""
    ref = [grid.derivative(f, l + 1) for l in range(3)]
    return np.stack([sum(grid.Ja[l, m] * ref[l] for l in range(3)) for m in range(3)]) / grid.J


@dataclass(frozen=True)
class TurbulenceStats:
    u_rms: float
    mach_t: float
    taylor_lambda: float       # +inf when the velocity has no normal gradients
    re_lambda: float           # nan when undefined
    e_k: float
    rho_mean: float

    @property
    def re_lambda_defined(self):
        return math.isfinite(self.re_lambda)


def turbulence_stats(q, grid: Grid, gas: GasModel):
    """U_RMS, Ma_t, Taylor microscale, Re_lambda and E_K, all volume means.

    lambda = sqrt(U_RMS / <sum_i (dU_i/dx_i)^2>) as displayed in the case
    definition; a denominator at round-off level gives the +inf sentinel.
    """
    rho, U, T, _, _ = primitives(q, gas, check=False)
    u_rms = math.sqrt(volume_mean(grid, np.sum(U * U, axis=0) / 3.0))
    c_mean = volume_mean(grid, sound_speed(T, gas))
    dsum = np.zeros_like(rho)
    gsum = np.zeros_like(rho)
    for i in range(3):
        gi = physical_gradient(grid, U[i])
        dsum += gi[i] ** 2
        gsum += np.sum(gi * gi, axis=0)
    denom = volume_mean(grid, dsum)
    rho_mean = volume_mean(grid, rho)
    # round-off floor relative to the full gradient or the box-scale shear
    floor = 1e-20 * max(volume_mean(grid, gsum), (u_rms / np.min(grid.hi - grid.lo)) ** 2)
    if denom <= floor:
        lam, re = math.inf, math.nan
    else:
        lam = math.sqrt(u_rms / denom)
        re = rho_mean * u_rms * lam / gas.mu if gas.mu > 0 else math.inf
    e_k = 0.5 * volume_mean(grid, rho * np.sum(U * U, axis=0))
    return TurbulenceStats(u_rms, u_rms / c_mean, lam, re, e_k, rho_mean)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    e_k: float
    total_entropy: float
    entropy_rate: float
    min_rho: float
    min_p: float
    errors: tuple = ()


def record(t, q, jrhs, grid: Grid, gas: GasModel, exact=None):
    rho, _, _, P, _ = primitives(q, gas, check=False)
    errs = tuple(m_norm_error(q, exact, grid)) if exact is not None else ()
    return DiagnosticsRecord(
        t=float(t), e_k=kinetic_energy(q, grid, gas),
        total_entropy=total_entropy(q, grid, gas),
        entropy_rate=entropy_rate(q, jrhs, grid, gas) if jrhs is not None else math.nan,
        min_rho=float(rho.min()), min_p=float(P.min()), errors=errs)
