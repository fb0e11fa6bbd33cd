"""LDG viscous terms in entropy variables with an interior-penalty term.

Gradient stage:   theta_a = D_a W + SAT_theta    (W taken from the plus side)
Flux stage:       sum_l D_l G_l + SAT_V + IP     (G taken from the minus side)

with G_l = sum_a Chat_la theta_a = sum_m Ja[l, m] F^V_m(Q, dW/dx).  Taking the
gradient and flux traces from opposite sides makes the operator telescope, so
the viscous entropy production is -sum theta^T Chat theta - IP <= 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gas import GasModel, entropy_variables, primitives
from .inviscid import boundary_slot, neighbour_trace
from .mesh import Grid, face_index, face_slice


@dataclass(frozen=True)
class ViscousConfig:
    enabled: bool = True
    c_ip: float | None = None   # None -> p (p + 1) / 2

    def __post_init__(self):
        if self.c_ip is not None and self.c_ip < 0:
            raise ValueError("c_ip must be non-negative")

    def ip_coefficient(self, p):
        return 0.5 * p * (p + 1) if self.c_ip is None else self.c_ip


def viscous_flux(q, grad_w, gas: GasModel, prims=None):
    """Physical viscous fluxes F^V_m, shape (3, 5, ...), from dW/dx_j.

    *grad_w* has shape (3, 5, ...) with grad_w[j] = dW/dx_j.  The velocity and
    temperature gradients follow from W = [.., U/T, -1/T]:
        dT = T^2 dW5,   dU_i = T dW_{1+i} + U_i T dW5.
    """
    rho, U, T, _, _ = primitives(q, gas, check=False) if prims is None else prims
    mu, kappa = gas.mu, gas.conductivity
    dT = T * T * grad_w[:, 4]                                   # (3, ...)
    dU = T * (grad_w[:, 1:4] + U[None] * grad_w[:, 4][:, None])  # dU[j, i] = dU_i/dx_j
    div = dU[0, 0] + dU[1, 1] + dU[2, 2]
    F = np.empty(grad_w.shape)
    F[:, 0] = 0.0
    for m in range(3):
        for i in range(3):
            tau = mu * (dU[m, i] + dU[i, m])
            if i == m:
                tau = tau - (2.0 / 3.0) * mu * div
            F[m, 1 + i] = tau
        F[m, 4] = np.sum(F[m, 1:4] * U, axis=0) + kappa * dT[m]
    return F


def c_matrices(q, gas: GasModel):
    """Viscous Jacobians C[m, j] (each 5x5) with F^V_m = sum_j C[m, j] dW/dx_j."""
    rho, U, T, _, _ = primitives(q, gas)
    mu, kappa = gas.mu, gas.conductivity
    C = np.zeros((3, 3, 5, 5) + rho.shape)
    d = np.eye(3)
    for m in range(3):
        for j in range(3):
            for i in range(3):
                for k in range(3):
                    C[m, j, 1 + i, 1 + k] = mu * T * (d[j, m] * d[i, k] + d[j, i] * d[m, k]
                                                      - (2.0 / 3.0) * d[i, m] * d[j, k])
                C[m, j, 1 + i, 4] = mu * T * (d[j, m] * U[i] + d[j, i] * U[m]
                                              - (2.0 / 3.0) * d[i, m] * U[j])
            for k in range(4):
                C[m, j, 4, 1 + k] = sum(U[i] * C[m, j, 1 + i, 1 + k] for i in range(3))
            C[m, j, 4, 4] += kappa * T * T * d[j, m]
    return C


def chat_matrices(q, Ja, J, gas: GasModel):
    """Chat[l, a] = sum_{m,j} Ja[l, m] C[m, j] Ja[a, j] / J, shape (3, 3, 5, 5, ...)."""
    C = c_matrices(q, gas)
    return np.einsum("lm...,mjxy...,aj...->laxy...", Ja, C, Ja) / J


def chat_apply(q, grad_xi, Ja, J, gas: GasModel):
    """sum_a Chat[l, a] dW/dxi_a for l = 1..3 via the explicit matrices."""
    Ch = chat_matrices(q, Ja, J, gas)
    return np.einsum("laxy...,ay...->lx...", Ch, grad_xi)


def contravariant_flux(q, theta, Ja, J, gas: GasModel, prims=None):
    """G_l = sum_a Chat[l, a] theta_a, evaluated through the physical flux."""
    grad_x = np.stack([sum(Ja[a, j] * theta[a] for a in range(3)) / J for j in range(3)])
    F = viscous_flux(q, grad_x, gas, prims)
    return np.stack([sum(Ja[l, m] * F[m] for m in range(3)) for l in range(3)])


def gradient_stage(grid: Grid, w, w_bc=None):
    """theta_a = D_a W plus one-sided LDG corrections, shape (3, 5, ...).

    The interface value of W is taken from the plus side (larger element
    index), so only the minus element's +face is corrected.  On Dirichlet
    faces the prescribed entropy variables *w_bc[(d, side)]* are used.
    """
    w_end = grid.op.op.weights[-1]
    theta = np.empty((3,) + w.shape)
    for d in range(3):
        th = grid.derivative(w, d + 1)
        w_in = face_slice(w, d, +1)
        jump = neighbour_trace(w, d, +1) - w_in
        if not grid.periodic[d]:
            slot = boundary_slot(w_in.ndim, d, +1)
            jump[slot] = w_bc[(d, +1)] - w_in[slot]
            idx = face_index(w.ndim, d, -1)
            lslot = boundary_slot(w_in.ndim, d, -1)
            wl = face_slice(w, d, -1)
            corr = np.zeros_like(wl)
            corr[lslot] = -(w_bc[(d, -1)] - wl[lslot]) / w_end
            th[idx] += corr
        th[face_index(w.ndim, d, +1)] += jump / w_end
        theta[d] = th
    return theta


def viscous_divergence(grid: Grid, gas: GasModel, q, theta, w, config: ViscousConfig,
                       w_bc=None, q_bc=None, prims=None):
    """sum_l D_l G_l + SAT_V + IP, a contribution to J dQ/dt."""
    w_end = grid.op.op.weights[-1]
    sigma = config.ip_coefficient(grid.p)
    if prims is None:
        prims = primitives(q, gas, check=False)
    U, T = prims[1], prims[2]
    G = contravariant_flux(q, theta, grid.Ja, grid.J, gas, prims)
    out = np.zeros_like(q)
    for d in range(3):
        out += grid.derivative(G[d], d + 1)
        # flux stage takes G from the minus side: the plus element's -face is
        # corrected by -(G_minus - G_plus)/w
        g_in = face_slice(G[d], d, -1)
        g_out = neighbour_trace(G[d], d, -1)
        corr = -(g_out - g_in) / w_end
        if not grid.periodic[d]:
            corr[boundary_slot(g_in.ndim, d, -1)] = 0.0
        out[face_index(q.ndim, d, -1)] += corr
        if sigma > 0:
            out += _interior_penalty(grid, gas, U, T, w, d, sigma, w_end, w_bc, q_bc)
    return out


def _normal_matrix_apply(U, T, n, J, v, gas):
    """Chat_nn v = n^T C (n v) / J, the viscous flux normal to n for a jump v.

    With dW/dx_j = n_j v / J the velocity gradient is n_j a_i, so the normal
    stress reduces to mu (|n|^2 a + n (n.a) / 3).
    """
    a = T * (v[1:4] + U * v[4]) / J
    nn = np.sum(n * n, axis=0)
    na = np.sum(n * a, axis=0)
    out = np.empty(v.shape)
    out[0] = 0.0
    out[1:4] = gas.mu * (nn * a + n * na / 3.0)
    out[4] = np.sum(out[1:4] * U, axis=0) + gas.conductivity * nn * T * T * v[4] / J
    return out


def _interior_penalty(grid, gas, U, T, w, d, sigma, w_end, w_bc, q_bc):
    """IP term on all faces of direction d, entropy-dissipative by construction."""
    out = np.zeros((5,) + grid.J.shape)
    n = face_slice(grid.Ja[d], d, +1)
    J_in = face_slice(grid.J, d, +1)
    J_out = neighbour_trace(grid.J, d, +1)
    U_in, T_in = face_slice(U, d, +1), face_slice(T, d, +1)
    U_out, T_out = neighbour_trace(U, d, +1), neighbour_trace(T, d, +1)
    jump = neighbour_trace(w, d, +1) - face_slice(w, d, +1)
    if not grid.periodic[d]:
        slot = boundary_slot(jump.ndim, d, +1)
        jump[slot] = w_bc[(d, +1)] - face_slice(w, d, +1)[slot]
        _, ub, tb, _, _ = primitives(q_bc[(d, +1)], gas, check=False)
        sslot = boundary_slot(T_in.ndim + 1, d, +1)[1:]
        U_out, T_out, J_out = U_out.copy(), T_out.copy(), J_out.copy()
        U_out[slot], T_out[sslot], J_out[sslot] = ub, tb, J_in[sslot]
    pen = 0.5 * sigma * (_normal_matrix_apply(U_in, T_in, n, J_in, jump, gas)
                         + _normal_matrix_apply(U_out, T_out, n, J_out, jump, gas)) / w_end
    # minus element +face gains +pen, plus element -face loses it
    out[face_index(out.ndim, d, +1)] += pen
    minus_side = np.roll(pen, 1, axis=pen.ndim - 5 + d)
    if not grid.periodic[d]:
        lslot = boundary_slot(jump.ndim, d, -1)
        sslot = boundary_slot(T_in.ndim + 1, d, -1)[1:]
        U_l, T_l = face_slice(U, d, -1)[lslot], face_slice(T, d, -1)[sslot]
        n_l = face_slice(grid.Ja[d], d, -1)[lslot]
        J_l = face_slice(grid.J, d, -1)[sslot]
        jump_l = face_slice(w, d, -1)[lslot] - w_bc[(d, -1)]
        _, ub, tb, _, _ = primitives(q_bc[(d, -1)], gas, check=False)
        minus_side[lslot] = 0.5 * sigma * (_normal_matrix_apply(U_l, T_l, n_l, J_l, jump_l, gas)
                                           + _normal_matrix_apply(ub, tb, n_l, J_l, jump_l,
                                                                  gas)) / w_end
    out[face_index(out.ndim, d, -1)] -= minus_side
    return out


def viscous_rhs(grid: Grid, gas: GasModel, q, config: ViscousConfig, q_bc=None, prims=None):
    """Full LDG + IP viscous contribution to J dQ/dt."""
    if prims is None:
        prims = primitives(q, gas)
    w = entropy_variables(q, gas, prims)
    w_bc = None
    if q_bc:
        w_bc = {k: entropy_variables(v, gas) for k, v in q_bc.items()}
    theta = gradient_stage(grid, w, w_bc)
    return viscous_divergence(grid, gas, q, theta, w, config, w_bc, q_bc, prims)
