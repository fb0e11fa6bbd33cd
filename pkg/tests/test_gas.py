import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssdc.gas import (AdmissibilityError, GasModel, conserved, conserved_from_entropy,
                      conserved_from_pressure, dq_dw, dq_dw_apply, entropy_flux,
                      entropy_function, entropy_potential, entropy_variables,
                      inviscid_flux, primitives)

from conftest import random_states


def test_stagnation_state():
    gas = GasModel(gamma=1.4, R=1.0)
    q = conserved_from_pressure(1.0, np.zeros(3), 1.0, gas)
    rho, U, T, P, H = primitives(q, gas)
    assert T == pytest.approx(1.0, abs=1e-15)
    assert q[4] == pytest.approx(2.5, abs=1e-15)


def test_roundtrip_and_enthalpy(rng, gas):
    q = random_states(rng, 200, gas)
    rho, U, T, P, H = primitives(q, gas)
    np.testing.assert_allclose(conserved(rho, U, T, gas), q, rtol=1e-14, atol=1e-14)
    E = q[4] / rho
    np.testing.assert_allclose(H - (E + P / rho), 0, atol=1e-13)
    np.testing.assert_allclose(P, rho * gas.R * T, rtol=1e-15)


@pytest.mark.parametrize("bad", ["rho", "T"])
def test_inadmissible_states_raise(gas, bad):
    rho, T = np.ones(4), np.ones(4)
    (rho if bad == "rho" else T)[2] = -0.1
    q = conserved(rho, np.zeros((3, 4)), T, gas)
    with pytest.raises(AdmissibilityError) as info:
        primitives(q, gas)
    assert info.value.location == (2,)


def test_gas_model_validation():
    for kw in ({"gamma": 1.0}, {"R": 0.0}, {"mu": -1.0}, {"kappa": -1.0}):
        with pytest.raises(ValueError):
            GasModel(**kw)
    g = GasModel(gamma=1.4, R=2.0, mu=0.1, Pr=0.7)
    assert g.conductivity == pytest.approx(g.cp * 0.1 / 0.7)


def test_entropy_variables_match_fd_gradient(rng, gas):
    q = random_states(rng, 100, gas)
    W = entropy_variables(q, gas)
    for n in range(q.shape[1]):
        h = 1e-6 * np.linalg.norm(q[:, n])
        fd = np.empty(5)
        for c in range(5):
            e = np.zeros(5)
            e[c] = h
            fd[c] = (entropy_function(q[:, n] + e, gas) - entropy_function(q[:, n] - e, gas)) / (2 * h)
        assert np.max(np.abs(fd - W[:, n])) <= 1e-6 * np.max(np.abs(W[:, n]))


def test_entropy_variable_roundtrip(rng, gas):
    q = random_states(rng, 100, gas)
    W = entropy_variables(q, gas)
    q2 = conserved_from_entropy(W, gas)
    np.testing.assert_allclose(q2, q, rtol=1e-10)
    np.testing.assert_allclose(entropy_variables(q2, gas), W, rtol=1e-10, atol=1e-12)


def test_dq_dw_symmetric_positive_definite(rng, gas):
    q = random_states(rng, 30, gas)
    A = dq_dw(q, gas)
    W = entropy_variables(q, gas)
    for n in range(q.shape[1]):
        # finite-difference oracle of dQ/dW
        fd = np.empty((5, 5))
        for c in range(5):
            h = 1e-6 * max(1.0, abs(W[c, n]))
            e = np.zeros(5)
            e[c] = h
            fd[:, c] = (conserved_from_entropy(W[:, n] + e, gas)
                        - conserved_from_entropy(W[:, n] - e, gas)) / (2 * h)
        scale = np.max(np.abs(fd))
        assert np.max(np.abs(fd - fd.T)) <= 1e-6 * scale
        assert np.max(np.abs(fd - A[..., n])) <= 1e-6 * scale
        assert np.linalg.eigvalsh(A[..., n]).min() > 0
    v = rng.standard_normal(q.shape)
    np.testing.assert_allclose(dq_dw_apply(q, v, gas), np.einsum("ij...,j...->i...", A, v),
                               rtol=1e-12, atol=1e-12)


def test_contraction_identity(rng, gas):
    q = random_states(rng, 200, gas)
    W = entropy_variables(q, gas)
    for d in (1, 2, 3):
        lhs = np.sum(W * inviscid_flux(q, d, gas), axis=0) - entropy_potential(q, d, gas)
        ref = entropy_flux(q, d, gas)
        assert np.max(np.abs(lhs - ref) / (np.abs(ref) + 1e-300)) <= 1e-10


def test_entropy_potential_properties(rng, gas):
    q = random_states(rng, 50, gas)
    rho, U, T, _, _ = primitives(q, gas)
    q0 = conserved(rho, 0 * U, T, gas)
    qm = conserved(rho, -U, T, gas)
    W = entropy_variables(q, gas)
    for d in (1, 2, 3):
        assert np.all(entropy_potential(q0, d, gas) == 0)
        np.testing.assert_allclose(entropy_potential(qm, d, gas), -entropy_potential(q, d, gas),
                                   rtol=1e-15)
        # second code path: psi = W.F - S U_d
        S = entropy_function(q, gas)
        alt = np.sum(W * inviscid_flux(q, d, gas), axis=0) - S * U[d - 1]
        np.testing.assert_allclose(alt, entropy_potential(q, d, gas), rtol=1e-12, atol=1e-12)
    with pytest.raises(ValueError):
        entropy_potential(q, 4, gas)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_entropy_reference_shift_is_affine(rho, T, u, v, w):
    g1 = GasModel(gamma=1.4, R=1.0)
    g2 = GasModel(gamma=1.4, R=1.0, T_ref=3.0, rho_ref=0.2)
    q = conserved(np.array(rho), np.array([u, v, w]), np.array(T), g1)
    dW = entropy_variables(q, g2) - entropy_variables(q, g1)
    # changing the origin only shifts the first entropy variable by a constant
    assert np.allclose(dW[1:], 0, atol=1e-14)
    expected = g1.cv * np.log(3.0) - g1.R * np.log(0.2)
    assert dW[0] == pytest.approx(expected, abs=1e-12)
