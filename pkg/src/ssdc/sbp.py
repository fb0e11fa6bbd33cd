"""Diagonal-norm summation-by-parts operators on Legendre-Gauss-Lobatto nodes.

One-dimensional operators are built once per degree and applied along the
lines of a tensor-product element block.  Element fields are stored with the
three node axes last, ``(..., N, N, N)``, ordered as (xi_1, xi_2, xi_3).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MIN_DEGREE = 1
MAX_DEGREE = 15


class ConfigurationError(ValueError):
    """Invalid solver configuration (degree, grid size, case parameters...)."""


def _legendre_and_derivative(p, x):
    """P_p(x), P_{p-1}(x) and P_p'(x) by the three-term recurrence."""
    pm1 = np.ones_like(x)
    pk = x.copy()
    if p == 0:
        return pm1, np.zeros_like(x), np.zeros_like(x)
    for k in range(2, p + 1):
        pm1, pk = pk, ((2 * k - 1) * x * pk - (k - 1) * pm1) / k
    # derivative is only needed at interior points, where 1 - x^2 != 0
    with np.errstate(divide="ignore", invalid="ignore"):
        dpk = p * (pm1 - x * pk) / (1.0 - x * x)
    return pk, pm1, dpk


def lgl_nodes_weights(p):
    """LGL nodes (roots of (1 - x^2) P_p'(x)) and quadrature weights."""
    n = p + 1
    # Chebyshev-Gauss-Lobatto initial guess, increasing order
    x = -np.cos(np.pi * np.arange(n) / p)
    for _ in range(100):
        pk, pm1, _ = _legendre_and_derivative(p, x)
        # Newton step on (1 - x^2) P_p'(x) = p (P_{p-1} - x P_p)
        dx = (x * pk - pm1) / (n * pk)
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    x[0], x[-1] = -1.0, 1.0
    pk, _, _ = _legendre_and_derivative(p, x)
    w = 2.0 / (p * n * pk**2)
    return x, w


def collocation_derivative(x):
    """Lagrange collocation derivative on nodes *x* (barycentric form)."""
    n = len(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    lam = 1.0 / np.prod(diff, axis=1)
    D = (lam[None, :] / lam[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    # negative-sum trick: rows annihilate constants to round-off
    D[np.diag_indices(n)] = -D.sum(axis=1)
    return D


@dataclass(frozen=True, eq=False)
class SbpOperator1D:
    """Diagonal-norm LGL SBP operator for one coordinate direction."""

    p: int
    nodes: np.ndarray
    weights: np.ndarray
    D: np.ndarray
    Q: np.ndarray
    E: np.ndarray

    @property
    def n(self):
        return self.p + 1

    @property
    def P(self):
        return np.diag(self.weights)

    @property
    def e_1(self):
        e = np.zeros(self.n)
        e[0] = 1.0
        return e

    @property
    def e_N(self):
        e = np.zeros(self.n)
        e[-1] = 1.0
        return e

    def sbp_residual(self):
        """Max entrywise |Q + Q^T - E|."""
        return float(np.max(np.abs(self.Q + self.Q.T - self.E)))

    def degree_residual(self):
        """Max over j <= p of ||D x^j - j x^(j-1)||_inf."""
        x = self.nodes
        res = 0.0
        for j in range(self.p + 1):
            exact = j * x ** (j - 1) if j > 0 else np.zeros_like(x)
            res = max(res, float(np.max(np.abs(self.D @ x**j - exact))))
        return res


@lru_cache(maxsize=None)
def build_lgl(p: int) -> SbpOperator1D:
    """Build the degree-*p* LGL SBP operator (1 <= p <= 15)."""
    if not isinstance(p, (int, np.integer)) or not MIN_DEGREE <= p <= MAX_DEGREE:
        raise ConfigurationError(
            f"polynomial degree must be in [{MIN_DEGREE}, {MAX_DEGREE}], got {p!r}")
    p = int(p)
    x, w = lgl_nodes_weights(p)
    D = collocation_derivative(x)
    Q = w[:, None] * D
    E = np.zeros((p + 1, p + 1))
    E[0, 0], E[-1, -1] = -1.0, 1.0
    for a in (x, w, D, Q, E):
        a.setflags(write=False)
    return SbpOperator1D(p=p, nodes=x, weights=w, D=D, Q=Q, E=E)


def apply_along(A, f, axis):
    """Apply matrix *A* along *axis* of *f* (line-by-line 1D application)."""
    out = np.tensordot(A, f, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True, eq=False)
class TensorOperator:
    """Tensor-product extension of one 1D operator to a hexahedral block."""

    op: SbpOperator1D
    mass: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = self.op.weights
        m = w[:, None, None] * w[None, :, None] * w[None, None, :]
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @property
    def p(self):
        return self.op.p

    @property
    def n(self):
        return self.op.n

    @property
    def n_nodes(self):
        return self.op.n**3

    def derivative(self, f, direction):
        """D_xi(direction) applied to *f*; direction is 1, 2 or 3."""
        if direction not in (1, 2, 3):
            raise ValueError(f"direction must be 1, 2 or 3, got {direction!r}")
        n = self.op.n
        if f.shape[-3:] != (n, n, n):
            raise ValueError(f"field node block must be {(n, n, n)}, got {f.shape[-3:]}")
        # batched matmuls on contiguous blocks; all three return C-ordered arrays
        D, s = self.op.D, f.shape
        f = np.ascontiguousarray(f, dtype=float)
        if direction == 3:
            return (f.reshape(-1, n) @ D.T).reshape(s)
        if direction == 2:
            return np.matmul(D, f)
        return np.matmul(D, f.reshape(s[:-3] + (n, n * n))).reshape(s)

    def dense_derivative(self, direction):
        """Materialised Kronecker matrix of D_xi(direction); small N only."""
        I = np.eye(self.op.n)
        mats = [I, I, I]
        mats[direction - 1] = self.op.D
        return np.kron(np.kron(mats[0], mats[1]), mats[2])


def build_tensor(p):
    return TensorOperator(build_lgl(p))


def apply_derivative(op: TensorOperator, direction, field):
    """Derivative of a per-node field along xi_direction.

    *field* may be flat (length N^3, row-major over xi_1, xi_2, xi_3) or carry
    the node block in its last three axes.
    """
    f = np.asarray(field, dtype=float)
    n = op.n
    if f.ndim == 1:
        if f.size != n**3:
            raise ValueError(f"expected {n**3} nodal values, got {f.size}")
        return op.derivative(f.reshape(n, n, n), direction).ravel()
    return op.derivative(f, direction)


def mass_weight(op: TensorOperator, node):
    """Diagonal entry of the tensor-product norm matrix at *node*.

    *node* is a flat index or an (i1, i2, i3) tuple.
    """
    if np.ndim(node) == 0:
        node = np.unravel_index(int(node), (op.n,) * 3)
    i, j, k = node
    return float(op.mass[i, j, k])
