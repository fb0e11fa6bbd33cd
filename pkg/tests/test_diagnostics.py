import math

import numpy as np
import pytest

from ssdc.cases import setup_tgv
from ssdc.diagnostics import (entropy_rate, integrate, kinetic_energy, m_norm_error,
                              ordered_sum, physical_gradient, record, total_entropy,
                              turbulence_stats, volume_mean)
from ssdc.fluxes import FluxScheme
from ssdc.gas import GasModel, conserved
from ssdc.mesh import build_cartesian, build_warped
from ssdc.solver import SemiDiscretization

from conftest import smooth_periodic_state


def test_m_norm_basic():
    g = build_warped([0, 0, 0], [1, 2, 3], 2, 3, 0.05)
    q = np.random.default_rng(0).standard_normal((5,) + g.J.shape)
    assert np.all(m_norm_error(q, q, g) == 0)
    err = m_norm_error(q + 0.3, q, g)
    np.testing.assert_allclose(err, 0.3 * math.sqrt(6.0), rtol=1e-12)


def test_m_norm_invariant_under_element_renumbering():
    g = build_cartesian([0] * 3, [1] * 3, 3, 3)
    r = np.random.default_rng(1)
    d = r.standard_normal((5,) + g.J.shape)
    base = m_norm_error(d, 0 * d, g)
    perm = r.permutation(27)
    shuffled = d.reshape((5, 27) + d.shape[4:])[:, perm].reshape(d.shape)
    g2 = build_cartesian([0] * 3, [1] * 3, 3, 3)   # affine: identical weights per element
    assert np.array_equal(m_norm_error(shuffled, 0 * d, g2), base)


def test_ordered_sum_is_compensated():
    # per-element partials are merged exactly
    a = np.zeros((3, 1, 1, 2, 2, 2))
    a[0, ..., 0, 0, 0] = 1e16
    a[1, ..., 0, 0, 1] = 1.0
    a[2, ..., 0, 0, 0] = -1e16
    assert ordered_sum(a) == 1.0


def test_integrals_and_means():
    g = build_warped([0] * 3, [2] * 3, 2, 4, 0.05)
    assert integrate(g, np.ones(g.J.shape)) == pytest.approx(8.0, rel=1e-12)
    assert volume_mean(g, np.full(g.J.shape, 3.5)) == pytest.approx(3.5, rel=1e-14)
    g = build_cartesian([0] * 3, [2] * 3, 2, 4)
    x = g.x
    grad = physical_gradient(g, x[0] ** 2 + x[1] * x[2])
    np.testing.assert_allclose(grad[0], 2 * x[0], atol=1e-12)
    np.testing.assert_allclose(grad[1], x[2], atol=1e-12)


def test_entropy_rate_signs_on_tgv_state():
    s = setup_tgv(3, 2, viscous=False)
    off = SemiDiscretization(s.grid, s.gas, FluxScheme("es-c", dissipation=False))
    on = SemiDiscretization(s.grid, s.gas, FluxScheme("es-c"))
    ek = kinetic_energy(s.q0, s.grid, s.gas)
    assert abs(entropy_rate(s.q0, off.jrhs(s.q0), s.grid, s.gas)) <= 1e-10 * ek
    assert entropy_rate(s.q0, on.jrhs(s.q0), s.grid, s.gas) <= 1e-12
    dc = SemiDiscretization(s.grid, s.gas, FluxScheme("dc"))
    assert math.isfinite(entropy_rate(s.q0, dc.jrhs(s.q0), s.grid, s.gas))


def test_uniform_flow_lambda_sentinel():
    gas = GasModel(gamma=1.4, R=1.0, mu=1e-3)
    g = build_cartesian([0] * 3, [1] * 3, 2, 2)
    sh = g.J.shape
    q = conserved(np.ones(sh), np.stack([np.full(sh, 0.5), np.zeros(sh), np.zeros(sh)]),
                  np.ones(sh), gas)
    st = turbulence_stats(q, g, gas)
    assert st.taylor_lambda == math.inf and not st.re_lambda_defined
    assert st.u_rms == pytest.approx(0.5 / math.sqrt(3))


def test_solid_body_rotation_lambda_sentinel():
    gas = GasModel(gamma=1.4, R=1.0, mu=1e-3)
    g = build_cartesian([-np.pi] * 3, [np.pi] * 3, 2, 3)
    U = np.stack([g.x[1], -g.x[0], 0 * g.x[0]])
    q = conserved(np.ones(g.J.shape), U, np.ones(g.J.shape), gas)
    st = turbulence_stats(q, g, gas)
    assert st.taylor_lambda == math.inf and math.isnan(st.re_lambda)


def test_turbulence_stats_values():
    gas = GasModel(gamma=1.4, R=1.0, mu=0.01)
    g = build_cartesian([0] * 3, [2 * np.pi] * 3, 4, 6)
    x = g.x
    U = np.stack([np.sin(x[0]), np.zeros_like(x[0]), np.zeros_like(x[0])])
    q = conserved(np.ones(g.J.shape), U, np.ones(g.J.shape), gas)
    st = turbulence_stats(q, g, gas)
    # <sin^2>/3 = 1/6, <cos^2> = 1/2
    assert st.u_rms == pytest.approx(math.sqrt(1 / 6), rel=1e-6)
    assert st.taylor_lambda == pytest.approx(math.sqrt(math.sqrt(1 / 6) / 0.5), rel=1e-5)
    assert st.re_lambda == pytest.approx(st.u_rms * st.taylor_lambda / 0.01, rel=1e-12)
    assert st.mach_t == pytest.approx(st.u_rms / math.sqrt(1.4), rel=1e-12)
    assert st.e_k == pytest.approx(0.25, rel=1e-6)


def test_record_fields_are_finite():
    gas = GasModel(gamma=1.4, R=1.0)
    g = build_cartesian([0] * 3, [1] * 3, 2, 2)
    q = smooth_periodic_state(g, gas)
    sd = SemiDiscretization(g, gas, FluxScheme("sf-kg"))
    rec = record(0.1, q, sd.jrhs(q), g, gas, exact=q)
    vals = [rec.e_k, rec.total_entropy, rec.entropy_rate, rec.min_rho, rec.min_p]
    assert all(math.isfinite(v) for v in vals)
    assert rec.errors == (0.0,) * 5
    assert rec.total_entropy == total_entropy(q, g, gas)
