"""Structured multi-element hexahedral grids with curvilinear metrics.

Nodal geometry arrays use the layout ``(K1, K2, K3, N, N, N)`` (element
indices, then node indices along xi_1, xi_2, xi_3); vector quantities carry
their extra axes in front.  ``Ja[l, m]`` stores J d(xi_l)/d(x_m), computed in
the conservative curl form so that sum_l D_l Ja[l, m] = 0 to round-off.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .sbp import ConfigurationError, TensorOperator, build_tensor

# node axis of direction d (0-based) in a (..., K1, K2, K3, N, N, N) array
def _node_axis(d):
    return -3 + d


def _elem_axis(d):
    return -6 + d


class Interface(NamedTuple):
    direction: int          # 1, 2 or 3
    minus: tuple            # element whose +xi_d face is shared
    plus: tuple             # element whose -xi_d face is shared
    periodic_wrap: bool


class BoundaryFace(NamedTuple):
    direction: int
    side: int               # -1 (xi_d = -1 face) or +1
    element: tuple
    kind: str               # "dirichlet"


def face_slice(f, d, side):
    """Face values of every element: node index 0 (side -1) or N-1 (side +1)
    along the node axis of 0-based direction *d*."""
    idx = [slice(None)] * f.ndim
    idx[f.ndim + _node_axis(d)] = 0 if side < 0 else -1
    return f[tuple(idx)]


def face_index(ndim, d, side):
    idx = [slice(None)] * ndim
    idx[ndim + _node_axis(d)] = 0 if side < 0 else -1
    return tuple(idx)


@dataclass(eq=False)
class Grid:
    op: TensorOperator
    K: tuple
    lo: np.ndarray
    hi: np.ndarray
    periodic: tuple
    x: np.ndarray        # (3, K1, K2, K3, N, N, N)
    J: np.ndarray        # (K1, K2, K3, N, N, N)
    Ja: np.ndarray       # (3, 3, K1, K2, K3, N, N, N)
    interfaces: list = field(default_factory=list)
    boundary_faces: list = field(default_factory=list)
    warp_amplitude: float = 0.0

    @property
    def p(self):
        return self.op.p

    @property
    def n_elements(self):
        return int(np.prod(self.K))

    @property
    def n_dofs(self):
        return self.n_elements * self.op.n_nodes

    @property
    def dofs_per_direction(self):
        return tuple(k * self.op.n for k in self.K)

    @property
    def weights(self):
        """Nodal mass-matrix diagonal (P J) per element, (K1, K2, K3, N, N, N)."""
        return self.op.mass * self.J

    @property
    def volume(self):
        return float(np.prod(self.hi - self.lo))

    def derivative(self, f, direction):
        return self.op.derivative(f, direction)

    def gcl_residual(self):
        return gcl_residual(self)

    def summary(self):
        gcl = gcl_residual(self)
        return (f"Grid K={self.K[0]}x{self.K[1]}x{self.K[2]} p={self.p} "
                f"dofs={self.n_dofs} periodic={self.periodic} "
                f"warp={self.warp_amplitude:g} min J={self.J.min():.6e} "
                f"max GCL residual={gcl.max():.3e}")

    def face_normal(self, d, side):
        """Outward metric normal (unnormalised) on the side of direction d."""
        n = face_slice(self.Ja[d], d, side)
        return n if side > 0 else -n

    def watertight_residual(self):
        """Max node mismatch between matched faces (periodic shift removed)."""
        err = 0.0
        L = self.hi - self.lo
        for d in range(3):
            right = face_slice(self.x, d, +1)
            left = np.roll(face_slice(self.x, d, -1), -1, axis=1 + d)
            diff = left - right
            if self.periodic[d]:
                shift = np.zeros(self.K[d])
                shift[-1] = L[d]
                shape = [1, 1, 1]
                shape[d] = self.K[d]
                diff[d] += shift.reshape(shape)[..., None, None]
            else:
                diff = np.delete(diff, -1, axis=1 + d)
            if diff.size:
                err = max(err, float(np.max(np.abs(diff))))
        return err


def _interfaces(K, periodic):
    faces, bnd = [], []
    for d in range(3):
        for e in np.ndindex(*K):
            nb = list(e)
            nb[d] += 1
            wrap = nb[d] == K[d]
            if wrap:
                if periodic[d]:
                    nb[d] = 0
                    faces.append(Interface(d + 1, e, tuple(nb), True))
                else:
                    bnd.append(BoundaryFace(d + 1, +1, e, "dirichlet"))
            else:
                faces.append(Interface(d + 1, e, tuple(nb), False))
            if e[d] == 0 and not periodic[d]:
                bnd.append(BoundaryFace(d + 1, -1, e, "dirichlet"))
    return faces, bnd


def _reference_coordinates(lo, hi, K, op):
    """Affine element-wise node coordinates X, shape (3, K1, K2, K3, N, N, N)."""
    n = op.n
    xi = op.op.nodes
    X = np.empty((3,) + tuple(K) + (n, n, n))
    for d in range(3):
        h = (hi[d] - lo[d]) / K[d]
        line = lo[d] + (np.arange(K[d])[:, None] + 0.5 * (xi[None, :] + 1.0)) * h
        shape = [1] * 6
        shape[d] = K[d]
        shape[3 + d] = n
        X[d] = line.reshape(shape)
    return X


def _check_box(lo, hi, K):
    lo = np.asarray(lo, dtype=float).reshape(3)
    hi = np.asarray(hi, dtype=float).reshape(3)
    if np.any(hi <= lo) or not np.all(np.isfinite(hi - lo)):
        raise ConfigurationError(f"degenerate box lo={lo}, hi={hi}")
    K = (K,) * 3 if np.ndim(K) == 0 else tuple(int(k) for k in K)
    if len(K) != 3 or min(K) < 1:
        raise ConfigurationError(f"need at least one element per direction, got {K}")
    return lo, hi, K


def _periodic_tuple(periodic):
    if isinstance(periodic, bool):
        return (periodic,) * 3
    return tuple(bool(v) for v in periodic)


def build_cartesian(lo, hi, K, p, periodic=True):
    """Affine grid of K elements per direction on the box [lo, hi]."""
    lo, hi, K = _check_box(lo, hi, K)
    op = build_tensor(p)
    x = _reference_coordinates(lo, hi, K, op)
    h = (hi - lo) / np.asarray(K)
    scale = 0.5 * h
    shape = tuple(K) + (op.n,) * 3
    J = np.full(shape, np.prod(scale))
    Ja = np.zeros((3, 3) + shape)
    for l in range(3):
        Ja[l, l] = np.prod(scale) / scale[l]
    periodic = _periodic_tuple(periodic)
    faces, bnd = _interfaces(K, periodic)
    return Grid(op, K, lo, hi, periodic, x, J, Ja, faces, bnd, 0.0)


def warp_map(X, lo, hi, amplitude):
    """Periodic sinusoidal warp, x_m = X_m + A L_m sin(2 pi s_{m+1}) sin(2 pi s_{m+2})
    with s = (X - lo)/L.  Each coordinate is displaced by a different function,
    so the cross-product metrics are not exact on the interpolated map."""
    L = (hi - lo).reshape((3,) + (1,) * (X.ndim - 1))
    sn = np.sin(2.0 * np.pi * (X - lo.reshape(L.shape)) / L)
    disp = np.stack([sn[1] * sn[2], sn[2] * sn[0], sn[0] * sn[1]])
    return X + amplitude * L * disp


def jacobian_matrix(op, x):
    """dx_m/dxi_l by collocation, returned as (3[m], 3[l], ...)."""
    return np.stack([np.stack([op.derivative(x[m], l + 1) for l in range(3)])
                     for m in range(3)])


def curl_metrics(op, x):
    """Conservative curl-form metric terms Ja[l, m] = J dxi_l/dx_m."""
    Ja = np.empty((3, 3) + x.shape[1:])
    for n in range(3):
        m, l = (n + 1) % 3, (n + 2) % 3
        # V_a = X_l dX_m/dxi_a, interpolated at the nodes
        V = [x[l] * op.derivative(x[m], a + 1) for a in range(3)]
        # Ja^i_n = -(curl_xi V)_i
        Ja[0, n] = -(op.derivative(V[2], 2) - op.derivative(V[1], 3))
        Ja[1, n] = -(op.derivative(V[0], 3) - op.derivative(V[2], 1))
        Ja[2, n] = -(op.derivative(V[1], 1) - op.derivative(V[0], 2))
    return Ja


def cross_product_metrics(op, x):
    """Non-conservative cross-product metrics (negative control for the GCL)."""
    dx = jacobian_matrix(op, x)           # dx[m, l] = dx_m/dxi_l
    a = [dx[:, l] for l in range(3)]      # covariant basis vectors
    Ja = np.empty((3, 3) + x.shape[1:])
    Ja[0] = np.cross(a[1], a[2], axis=0)
    Ja[1] = np.cross(a[2], a[0], axis=0)
    Ja[2] = np.cross(a[0], a[1], axis=0)
    return Ja


def build_warped(lo, hi, K, p, amplitude, periodic=True, metrics="curl"):
    """Curvilinear grid: degree-p interpolant of a sinusoidal warp of the box."""
    lo, hi, K = _check_box(lo, hi, K)
    op = build_tensor(p)
    X = _reference_coordinates(lo, hi, K, op)
    x = warp_map(X, lo, hi, amplitude)
    dx = jacobian_matrix(op, x)
    J = _det3(dx)
    if np.any(J <= 0):
        loc = tuple(int(i) for i in np.argwhere(J <= 0)[0])
        raise ConfigurationError(
            f"warp amplitude {amplitude} gives non-positive Jacobian at element "
            f"{loc[:3]}, node {loc[3:]} (x={x[(slice(None),) + loc]})")
    if metrics == "curl":
        Ja = curl_metrics(op, x)
    elif metrics == "cross":
        Ja = cross_product_metrics(op, x)
    else:
        raise ValueError(f"unknown metrics form {metrics!r}")
    periodic = _periodic_tuple(periodic)
    faces, bnd = _interfaces(K, periodic)
    return Grid(op, K, lo, hi, periodic, x, J, Ja, faces, bnd, float(amplitude))


def _det3(A):
    return (A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
            - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
            + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0]))


def gcl_residual(grid: Grid):
    """max |sum_l D_l Ja[l, m]| per element and m, shape (K1, K2, K3, 3)."""
    res = np.empty(tuple(grid.K) + (3,))
    for m in range(3):
        r = sum(grid.derivative(grid.Ja[l, m], l + 1) for l in range(3))
        res[..., m] = np.max(np.abs(r), axis=(-3, -2, -1))
    return res
