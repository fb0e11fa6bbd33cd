"""Compiled flux-differencing volume loop (the solver's hot spot)."""
import numba
import numpy as np

CHANDRASHEKAR = 0
KENNEDY_GRUBER = 1

_SERIES_EPS = 1e-4


@numba.njit(cache=True, inline="always")
def _log_mean(a, b, la, lb):
    s = a + b
    zeta = (a - b) / s
    u = zeta * zeta
    if u < _SERIES_EPS:
        return 0.5 * s / (1.0 + u * (1.0 / 3.0 + u * (0.2 + u / 7.0)))
    return (a - b) / (la - lb)


@numba.njit(cache=True)
def flux_differencing(kind, D, rho, u1, u2, u3, T, P, lrho, lT, Ja, gamma, R, out):
    """Accumulate sum_l sum_j D_l[i, j] F#(Q_i, Q_j; Ja_l(i) + Ja_l(j)) into *out*.

    Primitive arrays are (E, N^3) with row-major (xi_1, xi_2, xi_3) node
    ordering; Ja is (3, 3, E, N^3) and out (5, E, N^3).
    """
    n_el = rho.shape[0]
    N = D.shape[0]
    strides = (N * N, N, 1)
    cv = R / (gamma - 1.0)
    inv_2gm1 = 1.0 / (2.0 * (gamma - 1.0))
    for e in range(n_el):
        for l in range(3):
            s = strides[l]
            o1 = strides[(l + 1) % 3]
            o2 = strides[(l + 2) % 3]
            for a in range(N):
                for b in range(N):
                    base = a * o1 + b * o2
                    for i in range(N):
                        ni = base + i * s
                        for j in range(i, N):
                            nj = base + j * s
                            dij = D[i, j]
                            dji = D[j, i]
                            if i != j and dij == 0.0 and dji == 0.0:
                                continue
                            n1 = Ja[l, 0, e, ni] + Ja[l, 0, e, nj]
                            n2 = Ja[l, 1, e, ni] + Ja[l, 1, e, nj]
                            n3 = Ja[l, 2, e, ni] + Ja[l, 2, e, nj]
                            ua = 0.5 * (u1[e, ni] + u1[e, nj])
                            va = 0.5 * (u2[e, ni] + u2[e, nj])
                            wa = 0.5 * (u3[e, ni] + u3[e, nj])
                            un = ua * n1 + va * n2 + wa * n3
                            if kind == CHANDRASHEKAR:
                                r_hat = _log_mean(rho[e, ni], rho[e, nj],
                                                  lrho[e, ni], lrho[e, nj])
                                Ti = T[e, ni]
                                Tj = T[e, nj]
                                # beta = 1/(2 R T); log(beta_i) - log(beta_j) = lT_j - lT_i
                                bi = 0.5 / (R * Ti)
                                bj = 0.5 / (R * Tj)
                                b_hat = _log_mean(bi, bj, -lT[e, ni], -lT[e, nj])
                                p_t = R * (rho[e, ni] + rho[e, nj]) * Ti * Tj / (Ti + Tj)
                                q2 = 0.5 * (u1[e, ni] ** 2 + u2[e, ni] ** 2 + u3[e, ni] ** 2
                                            + u1[e, nj] ** 2 + u2[e, nj] ** 2 + u3[e, nj] ** 2)
                                f0 = r_hat * un
                                f1 = f0 * ua + p_t * n1
                                f2 = f0 * va + p_t * n2
                                f3 = f0 * wa + p_t * n3
                                f4 = (f0 * (inv_2gm1 / b_hat - 0.5 * q2)
                                      + ua * f1 + va * f2 + wa * f3)
                            else:
                                r_avg = 0.5 * (rho[e, ni] + rho[e, nj])
                                p_avg = 0.5 * (P[e, ni] + P[e, nj])
                                Ei = cv * T[e, ni] + 0.5 * (u1[e, ni] ** 2 + u2[e, ni] ** 2
                                                            + u3[e, ni] ** 2)
                                Ej = cv * T[e, nj] + 0.5 * (u1[e, nj] ** 2 + u2[e, nj] ** 2
                                                            + u3[e, nj] ** 2)
                                f0 = r_avg * un
                                f1 = f0 * ua + p_avg * n1
                                f2 = f0 * va + p_avg * n2
                                f3 = f0 * wa + p_avg * n3
                                f4 = f0 * 0.5 * (Ei + Ej) + p_avg * un
                            out[0, e, ni] += dij * f0
                            out[1, e, ni] += dij * f1
                            out[2, e, ni] += dij * f2
                            out[3, e, ni] += dij * f3
                            out[4, e, ni] += dij * f4
                            if j != i:
                                out[0, e, nj] += dji * f0
                                out[1, e, nj] += dji * f1
                                out[2, e, nj] += dji * f2
                                out[3, e, nj] += dji * f3
                                out[4, e, nj] += dji * f4
    return out


def warmup():
    """Trigger compilation on a tiny problem."""
    N = 2
    D = np.array([[-0.5, 0.5], [-0.5, 0.5]])
    one = np.ones((1, N**3))
    Ja = np.zeros((3, 3, 1, N**3))
    out = np.zeros((5, 1, N**3))
    for kind in (CHANDRASHEKAR, KENNEDY_GRUBER):
        flux_differencing(kind, D, one, 0 * one, 0 * one, 0 * one, one, one,
                          0 * one, 0 * one, Ja, 1.4, 1.0, out)
