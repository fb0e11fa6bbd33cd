"""Inviscid volume terms (flux differencing or divergence form) and SATs.

Every routine returns contributions to J dQ/dt.  The volume term is returned
with the sign it has on the left-hand side, so the semi-discretisation reads

    J dQ/dt = -volume_term(q) + inviscid_sat(q) + (viscous terms).
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .fluxes import TWO_POINT_FLUX, FluxScheme, pointwise_flux
from .gas import AdmissibilityError, GasModel, dq_dw_apply, entropy_variables, primitives
from .mesh import Grid, face_index, face_slice


def volume_term(grid: Grid, gas: GasModel, scheme: FluxScheme, q, time=None, prims=None):
    """Volume operator applied to the state, shape of *q*."""
    rho, U, T, P, _ = _checked_primitives(q, gas, time) if prims is None else prims
    if scheme.tag == "dc":
        f = [_flux_from_primitives(rho, U, T, P, m, gas) for m in range(3)]
        out = np.zeros_like(q)
        for l in range(3):
            # contravariant flux sum_m Ja[l, m] F_m, differentiated along xi_l
            out += grid.derivative(sum(grid.Ja[l, m] * f[m] for m in range(3)), l + 1)
        return out

    kind = _kernels.CHANDRASHEKAR if scheme.tag == "es-c" else _kernels.KENNEDY_GRUBER
    n = grid.op.n
    E = grid.n_elements
    flat = lambda a: np.ascontiguousarray(a.reshape(E, n**3))
    out = np.zeros((5, E, n**3))
    _kernels.flux_differencing(
        kind, grid.op.op.D, flat(rho), flat(U[0]), flat(U[1]), flat(U[2]), flat(T),
        flat(P), flat(np.log(rho)), flat(np.log(T)),
        np.ascontiguousarray(grid.Ja.reshape(3, 3, E, n**3)), gas.gamma, gas.R, out)
    return out.reshape(q.shape)


def _flux_from_primitives(rho, U, T, P, m, gas):
    f = np.empty((5,) + rho.shape)
    f[0] = rho * U[m]
    f[1:4] = f[0] * U
    f[1 + m] += P
    f[4] = f[0] * (gas.cp * T + 0.5 * np.sum(U * U, axis=0))
    return f


def _checked_primitives(q, gas, time=None):
    try:
        return primitives(q, gas)
    except AdmissibilityError as err:
        err.time = time
        raise


def max_wave_speed(q, n, gas: GasModel):
    """|U . n| + c |n| at every node."""
    rho, U, T, _, _ = primitives(q, gas, check=False)
    c = np.sqrt(gas.gamma * gas.R * T)
    return np.abs(np.sum(U * n, axis=0)) + c * np.sqrt(np.sum(n * n, axis=0))


def entropy_dissipation(gas: GasModel, q_in, q_out, n, c_diss=1.0):
    """(c lambda / 2) Hbar (W_out - W_in), Hbar = dQ/dW at the mean state."""
    lam = np.maximum(max_wave_speed(q_in, n, gas), max_wave_speed(q_out, n, gas))
    dw = entropy_variables(q_out, gas) - entropy_variables(q_in, gas)
    return 0.5 * c_diss * lam * dq_dw_apply(0.5 * (q_in + q_out), dw, gas)


def numerical_flux(scheme: FluxScheme, gas: GasModel, q_in, q_out, n, dissipation=None):
    """Interface flux F*(q_in, q_out) . n with optional entropy dissipation."""
    f = TWO_POINT_FLUX[scheme.tag](q_in, q_out, n, gas, check=False)
    if scheme.dissipation if dissipation is None else dissipation:
        c = scheme.c_diss if scheme.dissipation else 1.0
        f = f - entropy_dissipation(gas, q_in, q_out, n, c)
    return f


def face_sat(scheme: FluxScheme, gas: GasModel, q_in, q_out, n_out, w_end,
             dissipation=None):
    """SAT at face nodes of the element owning *q_in*; n_out is outward."""
    fstar = numerical_flux(scheme, gas, q_in, q_out, n_out, dissipation)
    return -(fstar - pointwise_flux(q_in, n_out, gas, check=False)) / w_end


def interface_sat(scheme: FluxScheme, gas: GasModel, q_minus, q_plus, n, w_end):
    """Coupling terms on both sides of a conforming face.

    *n* is the metric normal pointing from the minus element into the plus
    element.  Returns (sat_minus, sat_plus) at the matched face nodes.
    """
    if np.shape(q_minus) != np.shape(q_plus):
        raise ValueError("non-conforming face: trace shapes differ "
                         f"{np.shape(q_minus)} vs {np.shape(q_plus)}")
    n = np.asarray(n, dtype=float)
    return (face_sat(scheme, gas, q_minus, q_plus, n, w_end),
            face_sat(scheme, gas, q_plus, q_minus, -n, w_end))


def dirichlet_sat(scheme: FluxScheme, gas: GasModel, q_int, q_bc, n_out, w_end):
    """Weak Dirichlet condition: interface SAT against the prescribed state,
    always with dissipation."""
    if q_bc is None:
        raise ValueError("Dirichlet face without boundary data")
    return face_sat(scheme, gas, q_int, q_bc, n_out, w_end, dissipation=True)


def neighbour_trace(f, d, side):
    """Trace of the neighbouring element across the *side* face of direction d,
    aligned with the local element (periodic wrap-around)."""
    other = face_slice(f, d, -side)
    return np.roll(other, -side, axis=other.ndim - 5 + d)


def boundary_slot(ndim, d, side):
    """Index of the boundary slot (first/last element along d) in a face array."""
    idx = [slice(None)] * ndim
    idx[ndim - 5 + d] = -1 if side > 0 else 0
    return tuple(idx)


def inviscid_sat(grid: Grid, gas: GasModel, scheme: FluxScheme, q, bc_states=None):
    """All inviscid interface and boundary SATs.

    The numerical flux is evaluated once per interface and used with opposite
    signs on its two sides.  *bc_states* maps (direction, side) of every
    non-periodic boundary to the prescribed conserved state on that face (see
    boundary_states).
    """
    sat = np.zeros_like(q)
    w_end = grid.op.op.weights[-1]
    for d in range(3):
        q_m = face_slice(q, d, +1)                 # minus element, +face
        q_p = neighbour_trace(q, d, +1)            # plus element, -face (aligned)
        n = face_slice(grid.Ja[d], d, +1)
        fstar = numerical_flux(scheme, gas, q_m, q_p, n)
        sat_m = -(fstar - pointwise_flux(q_m, n, gas, check=False)) / w_end
        sat_p = (fstar - pointwise_flux(q_p, n, gas, check=False)) / w_end
        axis = sat_p.ndim - 5 + d
        sat_p = np.roll(sat_p, 1, axis=axis)       # back onto the plus element
        if not grid.periodic[d]:
            for side, contrib in ((+1, sat_m), (-1, sat_p)):
                slot = boundary_slot(q_m.ndim, d, side)
                q_in = face_slice(q, d, side)[slot]
                q_bc = None if bc_states is None else bc_states.get((d, side))
                n_out = side * face_slice(grid.Ja[d], d, side)[slot]
                contrib[slot] = dirichlet_sat(scheme, gas, q_in, q_bc, n_out, w_end)
        sat[face_index(q.ndim, d, +1)] += sat_m
        sat[face_index(q.ndim, d, -1)] += sat_p
    return sat


def boundary_states(grid: Grid, boundary, t):
    """Prescribed states on every boundary face: {(d, side): q_face}.

    *boundary* is a callable ``(x_face, t) -> q_face``.
    """
    out = {}
    for d in range(3):
        if grid.periodic[d]:
            continue
        for side in (+1, -1):
            x_face = face_slice(grid.x, d, side)[boundary_slot(grid.x.ndim - 1, d, side)]
            out[(d, side)] = boundary(x_face, t)
    return out
