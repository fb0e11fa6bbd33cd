"""Calorically perfect gas: variable conversions, entropy, entropy variables.

State arrays carry the five conserved components on axis 0:
``q = [rho, rho*U1, rho*U2, rho*U3, rho*E]``.  Every function is vectorised
over the trailing axes.

With s = cv ln(T/T_ref) - R ln(rho/rho_ref) and S = -rho s,

    W = dS/dQ = [cp - s - |U|^2/(2T), U1/T, U2/T, U3/T, -1/T]
    psi_m = W . F_m - S U_m = rho R U_m.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AdmissibilityError(FloatingPointError):
    """Non-positive density/temperature/pressure or a non-finite value.

    ``location`` is an index tuple into the failing array (or None) and
    ``time`` the solution time when known.
    """

    def __init__(self, message, location=None, time=None):
        super().__init__(message)
        self.location = location
        self.time = time


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4
    R: float = 1.0
    mu: float = 0.0
    Pr: float = 0.71
    kappa: float | None = None
    T_ref: float = 1.0
    rho_ref: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.R > 0.0:
            raise ValueError(f"R must be positive, got {self.R}")
        if self.mu < 0.0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")
        if self.kappa is not None and self.kappa < 0.0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")

    @property
    def cp(self):
        return self.gamma * self.R / (self.gamma - 1.0)

    @property
    def cv(self):
        return self.R / (self.gamma - 1.0)

    @property
    def conductivity(self):
        if self.kappa is not None:
            return self.kappa
        return self.cp * self.mu / self.Pr


def _first_bad(mask):
    idx = np.argwhere(mask)
    return tuple(int(i) for i in idx[0]) if len(idx) else None


def check_admissible(rho, T, P=None, time=None):
    """Raise AdmissibilityError unless rho, T (and P) are finite and positive."""
    bad = ~(np.isfinite(rho) & np.isfinite(T)) | (rho <= 0.0) | (T <= 0.0)
    if P is not None:
        bad |= ~np.isfinite(P) | (P <= 0.0)
    if np.any(bad):
        loc = _first_bad(bad)
        raise AdmissibilityError(
            f"inadmissible state at {loc}: rho={np.asarray(rho)[loc]!r}, "
            f"T={np.asarray(T)[loc]!r}", location=loc, time=time)


def primitives(q, gas: GasModel, check=True):
    """(rho, U, T, P, H) from conserved variables; U has a leading axis of 3."""
    q = np.asarray(q, dtype=float)
    rho = q[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        U = q[1:4] / rho
        ke = 0.5 * np.sum(U * U, axis=0)
        e = q[4] / rho - ke
        T = e / gas.cv
    P = rho * gas.R * T
    if check:
        check_admissible(rho, T, P)
    H = gas.cp * T + ke
    return rho, U, T, P, H


def conserved(rho, U, T, gas: GasModel):
    """Conserved variables from density, velocity (3, ...) and temperature."""
    rho = np.asarray(rho, dtype=float)
    U = np.asarray(U, dtype=float)
    T = np.asarray(T, dtype=float)
    q = np.empty((5,) + np.broadcast(rho, U[0], T).shape)
    q[0] = rho
    q[1:4] = rho * U
    q[4] = rho * (gas.cv * T + 0.5 * np.sum(U * U, axis=0))
    return q


def conserved_from_pressure(rho, U, P, gas: GasModel):
    return conserved(rho, U, np.asarray(P) / (np.asarray(rho) * gas.R), gas)


def sound_speed(T, gas: GasModel):
    return np.sqrt(gas.gamma * gas.R * T)


def specific_entropy(rho, T, gas: GasModel):
    return gas.cv * np.log(T / gas.T_ref) - gas.R * np.log(rho / gas.rho_ref)


def entropy_function(q, gas: GasModel):
    """Mathematical entropy S = -rho s."""
    rho, _, T, _, _ = primitives(q, gas)
    return -rho * specific_entropy(rho, T, gas)


def entropy_variables(q, gas: GasModel, prims=None):
    rho, U, T, _, _ = primitives(q, gas) if prims is None else prims
    s = specific_entropy(rho, T, gas)
    w = np.empty_like(np.asarray(q, dtype=float))
    w[0] = gas.cp - s - 0.5 * np.sum(U * U, axis=0) / T
    w[1:4] = U / T
    w[4] = -1.0 / T
    return w


def conserved_from_entropy(w, gas: GasModel):
    """Inverse of entropy_variables."""
    w = np.asarray(w, dtype=float)
    T = -1.0 / w[4]
    U = w[1:4] * T
    s = gas.cp - 0.5 * np.sum(U * U, axis=0) / T - w[0]
    rho = gas.rho_ref * np.exp((gas.cv * np.log(T / gas.T_ref) - s) / gas.R)
    return conserved(rho, U, T, gas)


def entropy_potential(q, direction, gas: GasModel):
    """Entropy-flux potential psi_direction = rho R U_direction."""
    if direction not in (1, 2, 3):
        raise ValueError(f"direction must be 1, 2 or 3, got {direction!r}")
    rho, U, _, _, _ = primitives(q, gas)
    return rho * gas.R * U[direction - 1]


def entropy_flux(q, direction, gas: GasModel):
    """Physical entropy flux S U_m = -rho s U_m."""
    rho, U, T, _, _ = primitives(q, gas)
    return -rho * specific_entropy(rho, T, gas) * U[direction - 1]


def dq_dw(q, gas: GasModel):
    """Symmetric positive-definite Jacobian dQ/dW, shape (5, 5, ...)."""
    rho, U, T, P, H = primitives(q, gas)
    E = q[4] / rho
    A = np.empty((5, 5) + rho.shape)
    A[0, 0] = rho
    A[0, 1:4] = A[1:4, 0] = rho * U
    A[0, 4] = A[4, 0] = rho * E
    for i in range(3):
        for j in range(3):
            A[1 + i, 1 + j] = rho * U[i] * U[j] + (P if i == j else 0.0)
        A[1 + i, 4] = A[4, 1 + i] = rho * U[i] * H
    c2 = gas.gamma * gas.R * T
    A[4, 4] = rho * H * H - c2 * P / (gas.gamma - 1.0)
    return A / gas.R


def dq_dw_apply(q, v, gas: GasModel):
    """(dQ/dW) v without forming the matrix; q and v are (5, ...)."""
    rho, U, T, P, H = primitives(q, gas, check=False)
    E = q[4] / rho
    uv = np.sum(U * v[1:4], axis=0)
    out = np.empty(np.broadcast(q, v).shape)
    out[0] = rho * (v[0] + uv + E * v[4])
    for i in range(3):
        out[1 + i] = rho * U[i] * (v[0] + uv + H * v[4]) + P * v[1 + i]
    c2 = gas.gamma * gas.R * T
    out[4] = (rho * E * v[0] + rho * H * uv
              + (rho * H * H - c2 * P / (gas.gamma - 1.0)) * v[4])
    return out / gas.R


def inviscid_flux(q, direction, gas: GasModel, check=True):
    """Pointwise Euler flux in Cartesian direction 1, 2 or 3."""
    m = direction - 1
    rho, U, T, P, H = primitives(q, gas, check=check)
    f = np.empty(np.asarray(q).shape)
    mass = rho * U[m]
    f[0] = mass
    f[1:4] = mass * U
    f[1 + m] += P
    f[4] = mass * H
    return f
