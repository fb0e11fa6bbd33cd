from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssdc.fluxes import (FluxScheme, flux_central, flux_chandrashekar, flux_kennedy_gruber,
                         log_mean, pointwise_flux)
from ssdc.gas import GasModel, conserved, conserved_from_pressure, entropy_potential, entropy_variables

from conftest import random_states


def tadmor_residual(flux, qi, qj, d, gas):
    Wi, Wj = entropy_variables(qi, gas), entropy_variables(qj, gas)
    lhs = np.sum((Wi - Wj) * flux(qi, qj, d, gas), axis=0)
    rhs = entropy_potential(qi, d, gas) - entropy_potential(qj, d, gas)
    scale = np.abs(Wi - Wj).max(axis=0) * np.abs(flux(qi, qj, d, gas)).max(axis=0) + np.abs(rhs)
    return np.abs(lhs - rhs) / scale


def test_log_mean_values():
    assert log_mean(2.5, 2.5) == 2.5
    assert log_mean(1.0, np.e) == pytest.approx(np.e - 1, rel=1e-15)
    with pytest.raises(ValueError):
        log_mean(0.0, 1.0)


def test_log_mean_near_equal_against_extended_precision():
    getcontext().prec = 50
    b = 1 + 1e-14
    a_, b_ = Decimal(1), Decimal(b)
    ref = (b_ - a_) / (b_.ln() - a_.ln())
    val = log_mean(1.0, b)
    assert np.isfinite(val)
    # the exact value 1 + 5e-15 - O(1e-29) falls halfway between two doubles,
    # so half an ulp (1.11e-16) is the best any double can achieve
    half_ulp = Decimal(np.spacing(1.0)) / 2
    assert abs(Decimal(val) - ref) <= half_ulp * Decimal("1.0000001")


def test_log_mean_bounds_million_pairs():
    r = np.random.default_rng(7)
    a = np.exp(r.uniform(-8, 8, 10**6))
    b = a * np.exp(r.choice([r.uniform(-1e-6, 1e-6), 1.0], 10**6) * r.uniform(-3, 3, 10**6))
    m = log_mean(a, b)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    assert np.all(np.isfinite(m))
    assert np.all(m >= lo * (1 - 1e-15)) and np.all(m <= hi * (1 + 1e-15))


@given(st.floats(1e-3, 1e3), st.floats(-1e-3, 1e-3))
def test_log_mean_series_branch_is_smooth(a, eps):
    getcontext().prec = 60
    b = a * (1 + eps)
    if a == b:
        assert log_mean(a, b) == a
        return
    ref = float((Decimal(b) - Decimal(a)) / (Decimal(b).ln() - Decimal(a).ln()))
    assert log_mean(a, b) == pytest.approx(ref, rel=2e-15)


def test_pointwise_flux_hand_values():
    gas = GasModel(gamma=1.4, R=1.0)
    q = conserved_from_pressure(1.0, np.array([2.0, 0, 0]), 1.0, gas)
    np.testing.assert_allclose(pointwise_flux(q, 1, gas), [2, 5, 0, 0, 11], rtol=1e-14)
    q0 = conserved_from_pressure(1.0, np.zeros(3), 1.0, gas)
    for d in (1, 2, 3):
        f = pointwise_flux(q0, d, gas)
        e = np.zeros(5)
        e[d] = 1.0
        np.testing.assert_allclose(f, e, atol=1e-15)


def test_pointwise_flux_reflection(rng, gas):
    q = random_states(rng, 20, gas)
    qr = q.copy()
    qr[1] *= -1
    f, fr = pointwise_flux(q, 1, gas), pointwise_flux(qr, 1, gas)
    np.testing.assert_allclose(fr[[0, 2, 3, 4]], -f[[0, 2, 3, 4]], rtol=1e-14)
    np.testing.assert_allclose(fr[1], f[1], rtol=1e-14)


@pytest.mark.parametrize("flux", [flux_chandrashekar, flux_kennedy_gruber, flux_central])
def test_consistency_and_symmetry(rng, gas, flux):
    qi, qj = random_states(rng, 200, gas), random_states(rng, 200, gas)
    n = rng.standard_normal((3, 200))
    for d in (1, 2, 3, n):
        np.testing.assert_allclose(flux(qi, qi, d, gas), pointwise_flux(qi, d, gas),
                                   rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(flux(qi, qj, d, gas), flux(qj, qi, d, gas),
                                   rtol=1e-14, atol=1e-14)


def test_normal_vector_is_linear_combination(rng, gas):
    qi, qj = random_states(rng, 50, gas), random_states(rng, 50, gas)
    n = rng.standard_normal((3, 50))
    for flux in (flux_chandrashekar, flux_kennedy_gruber):
        comb = sum(n[d - 1] * flux(qi, qj, d, gas) for d in (1, 2, 3))
        np.testing.assert_allclose(flux(qi, qj, n, gas), comb, rtol=1e-12, atol=1e-12)


def test_tadmor_condition():
    gas = GasModel(gamma=1.4, R=1.0)
    r = np.random.default_rng(2024)
    qi, qj = random_states(r, 1000, gas), random_states(r, 1000, gas)
    for d in (1, 2, 3):
        assert tadmor_residual(flux_chandrashekar, qi, qj, d, gas).max() <= 1e-11
        assert tadmor_residual(flux_kennedy_gruber, qi, qj, d, gas).max() > 1e-6


def test_kennedy_gruber_at_rest():
    gas = GasModel(gamma=1.4, R=1.0)
    q = conserved(np.array(1.3), np.zeros(3), np.array(0.7), gas)
    f = flux_kennedy_gruber(q, q, 2, gas)
    assert f[0] == 0 and f[1] == 0 and f[3] == 0 and f[4] == 0 and f[2] > 0


def test_scheme_validation():
    assert FluxScheme("ES-C").tag == "es-c"
    with pytest.raises(ValueError):
        FluxScheme("roe")
    with pytest.raises(ValueError):
        FluxScheme("dc", c_diss=-1)
