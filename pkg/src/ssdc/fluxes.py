"""Pointwise and two-point inviscid fluxes.

All functions are vectorised over trailing axes.  The two-point fluxes take
either a Cartesian direction (1, 2, 3) or a normal/metric vector ``n`` of
shape (3, ...); with a vector the result is ``sum_m n_m F_m(Q_i, Q_j)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gas import GasModel, primitives

SCHEMES = ("es-c", "sf-kg", "dc")

# switch to the series form of the logarithmic mean below this zeta^2
LOG_MEAN_SERIES_EPS = 1e-4


@dataclass(frozen=True)
class FluxScheme:
    tag: str = "es-c"
    dissipation: bool = True
    c_diss: float = 1.0

    def __post_init__(self):
        tag = self.tag.lower()
        if tag not in SCHEMES:
            raise ValueError(f"unknown scheme {self.tag!r}; expected one of {SCHEMES}")
        object.__setattr__(self, "tag", tag)
        if self.c_diss < 0:
            raise ValueError("c_diss must be non-negative")


def log_mean(a, b):
    """Logarithmic mean (a - b)/(ln a - ln b), stable as a -> b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("log_mean requires positive arguments")
    zeta = (a - b) / (a + b)
    u = zeta * zeta
    small = u < LOG_MEAN_SERIES_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        far = (a - b) / (np.log(a) - np.log(b))
    series = (a + b) / (2.0 * (1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0))
    out = np.where(small, series, far)
    return out if out.ndim else float(out)


def _as_normal(direction_or_normal, shape):
    if np.ndim(direction_or_normal) == 0:
        n = np.zeros((3,) + shape)
        n[int(direction_or_normal) - 1] = 1.0
        return n
    return np.broadcast_to(np.asarray(direction_or_normal, dtype=float), (3,) + shape)


def pointwise_flux(q, direction_or_normal, gas: GasModel, check=True):
    """Euler flux F(Q) . n at every node."""
    q = np.asarray(q, dtype=float)
    rho, U, T, P, H = primitives(q, gas, check=check)
    n = _as_normal(direction_or_normal, rho.shape)
    un = np.sum(U * n, axis=0)
    f = np.empty(q.shape)
    f[0] = rho * un
    f[1:4] = f[0] * U + P * n
    f[4] = f[0] * H
    return f


def flux_chandrashekar(qi, qj, direction_or_normal, gas: GasModel, check=True):
    """Chandrashekar's kinetic-energy-preserving entropy-conservative flux."""
    ri, Ui, Ti, _, _ = primitives(qi, gas, check=check)
    rj, Uj, Tj, _, _ = primitives(qj, gas, check=check)
    n = _as_normal(direction_or_normal, np.broadcast(ri, rj).shape)
    rho_ln = log_mean(ri, rj)
    beta_i, beta_j = 0.5 / (gas.R * Ti), 0.5 / (gas.R * Tj)
    beta_ln = log_mean(beta_i, beta_j)
    U_avg = 0.5 * (Ui + Uj)
    u2_avg = 0.5 * (np.sum(Ui * Ui, axis=0) + np.sum(Uj * Uj, axis=0))
    p_tilde = gas.R * 0.5 * (ri + rj) * Ti * Tj / (0.5 * (Ti + Tj))
    un = np.sum(U_avg * n, axis=0)
    f = np.empty(np.broadcast(qi, qj).shape)
    f[0] = rho_ln * un
    f[1:4] = f[0] * U_avg + p_tilde * n
    f[4] = (f[0] * (1.0 / (2.0 * (gas.gamma - 1.0) * beta_ln) - 0.5 * u2_avg)
            + np.sum(U_avg * f[1:4], axis=0))
    return f


def flux_kennedy_gruber(qi, qj, direction_or_normal, gas: GasModel, check=True):
    """Kennedy-Gruber split-form flux (arithmetic means only)."""
    ri, Ui, _, Pi, _ = primitives(qi, gas, check=check)
    rj, Uj, _, Pj, _ = primitives(qj, gas, check=check)
    n = _as_normal(direction_or_normal, np.broadcast(ri, rj).shape)
    r_avg = 0.5 * (ri + rj)
    U_avg = 0.5 * (Ui + Uj)
    P_avg = 0.5 * (Pi + Pj)
    E_avg = 0.5 * (np.asarray(qi)[4] / ri + np.asarray(qj)[4] / rj)
    un = np.sum(U_avg * n, axis=0)
    f = np.empty(np.broadcast(qi, qj).shape)
    f[0] = r_avg * un
    f[1:4] = f[0] * U_avg + P_avg * n
    f[4] = f[0] * E_avg + P_avg * un
    return f


def flux_central(qi, qj, direction_or_normal, gas: GasModel, check=True):
    """Arithmetic average of the pointwise fluxes (interface flux for DC)."""
    return 0.5 * (pointwise_flux(qi, direction_or_normal, gas, check)
                  + pointwise_flux(qj, direction_or_normal, gas, check))


TWO_POINT_FLUX = {
    "es-c": flux_chandrashekar,
    "sf-kg": flux_kennedy_gruber,
    "dc": flux_central,
}
