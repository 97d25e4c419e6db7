import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import band_limited
from nlburgers.grid import Grid, lp_norm
from nlburgers.kernels import SPECTRAL
from nlburgers.operators import (analytic_norm, dealiased_product, grad_spectral,
                                 h_half_seminorm_sq, halflap_delta, halflap_spectral,
                                 pv_apply, seminorm_report)


def test_halflap_examples():
    g = Grid(64)
    assert np.max(np.abs(halflap_spectral(g.field(np.full(64, 2.5))).values)) < 1e-14
    np.testing.assert_allclose(halflap_spectral(g.sample(lambda x: np.sin(3 * x))).values,
                               3 * np.sin(3 * g.nodes), atol=1e-13)
    u = g.sample(lambda x: 2 + np.sin(x) + 0.3 * np.cos(5 * x))
    np.testing.assert_allclose(halflap_spectral(u).values,
                               np.sin(g.nodes) + 1.5 * np.cos(5 * g.nodes), atol=1e-13)


def test_symbol_consistency_all_modes():
    n = 64
    g = Grid(n)
    for k in range(0, n // 4 + 1):
        for f in (np.cos, np.sin):
            v = f(k * g.nodes)
            out = halflap_spectral(g.field(v)).values
            assert np.max(np.abs(out - k * v)) <= 1e-12 * max(k, 1)


def test_halflap_delta_examples():
    g = Grid(64)
    assert np.max(np.abs(halflap_delta(g.field(np.full(64, 4.0)), 0.5).values)) < 1e-14
    np.testing.assert_allclose(halflap_delta(g.sample(np.sin), 1.0).values,
                               (1 - math.exp(-1)) * np.sin(g.nodes), atol=1e-14)
    with pytest.raises(ValueError):
        halflap_delta(g.sample(np.sin), 0.0)


@pytest.mark.parametrize("delta", [1.0, 0.3, 0.1, 0.01, 1e-3])
def test_halflap_delta_convergence_bound(rng, delta):
    # |k - (1 - e^{-delta k})/delta| <= delta k^2 / 2, so the L2 gap is <= delta |f''|_2
    g = Grid(128)
    f = g.field(band_limited(rng, 128, kmax=12, mean=1.0))
    gap = lp_norm(halflap_delta(f, delta) - halflap_spectral(f), 2)
    fxx = grad_spectral(grad_spectral(f))
    assert gap <= delta * lp_norm(fxx, 2)


def test_halflap_delta_monotone_in_delta():
    g = Grid(32)
    f = g.sample(lambda x: np.cos(3 * x))
    amps = [np.max(halflap_delta(f, d).values) for d in (0.01, 0.1, 0.5, 1.0, 3.0)]
    assert all(b <= a for a, b in zip(amps, amps[1:]))


def test_grad_examples():
    g = Grid(64)
    assert np.max(np.abs(grad_spectral(g.field(np.full(64, 1.0))).values)) < 1e-14
    np.testing.assert_allclose(grad_spectral(g.sample(np.sin)).values, np.cos(g.nodes), atol=1e-13)
    np.testing.assert_allclose(grad_spectral(g.sample(lambda x: np.cos(5 * x))).values,
                               -5 * np.sin(5 * g.nodes), atol=1e-12)


def test_pv_apply_constants_and_grids(backend, rng):
    g = Grid(64)
    c = g.field(np.full(64, 1.7))
    h = g.field(rng.standard_normal(64))
    assert np.max(np.abs(pv_apply(c, h).values)) == 0.0
    with pytest.raises(ValueError):
        pv_apply(c, Grid(32).field(np.ones(32)))


def test_pv_apply_against_halflap(backend):
    g = Grid(256)
    f = g.sample(np.sin)
    one = g.field(np.ones(256))
    err = np.max(np.abs(pv_apply(f, one, SPECTRAL).values + np.sin(g.nodes)))
    assert err < 2e-2


def test_pv_apply_converges_first_order(backend):
    errs = []
    for n in (64, 128, 256, 512):
        g = Grid(n)
        f = g.sample(lambda x: np.exp(np.cos(x)))
        one = g.field(np.ones(n))
        errs.append(np.max(np.abs(pv_apply(f, one).values + halflap_spectral(f).values)))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    # the error is exactly proportional to delta here; allow for rounding only
    assert all(o >= 1.0 - 1e-9 for o in orders), orders


def test_pv_apply_matches_spectral_bracket(backend):
    g = Grid(512)
    u = g.sample(lambda x: 2 + np.sin(x))
    quad = pv_apply(u, u).values
    lu = halflap_spectral(u).values
    spec = u.values * lu - halflap_spectral(g.field(dealiased_product(u.values, u.values))).values
    assert np.max(np.abs(quad - spec)) / np.max(np.abs(spec)) <= 5e-2


def test_pv_apply_linear_in_f(backend, rng):
    g = Grid(64)
    a, b, w = (g.field(rng.standard_normal(64)) for _ in range(3))
    lhs = pv_apply(2.0 * a + b, w).values
    rhs = 2.0 * pv_apply(a, w).values + pv_apply(b, w).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-11)


def test_h_half_examples():
    g = Grid(64)
    assert h_half_seminorm_sq(g.field(np.full(64, 3.0))) == 0.0
    assert h_half_seminorm_sq(g.sample(np.sin)) == pytest.approx(math.pi, rel=1e-13)
    assert h_half_seminorm_sq(g.sample(lambda x: np.sin(x) + np.cos(5 * x))) == pytest.approx(6 * math.pi, rel=1e-13)


def test_h_half_zero_iff_constant(rng):
    g = Grid(32)
    assert h_half_seminorm_sq(g.field(rng.standard_normal(32))) > 1e-12


def test_analytic_norm_examples():
    g = Grid(64)
    assert analytic_norm(g.field(np.full(64, -2.0)), 1.3) == pytest.approx(2.0)
    assert analytic_norm(g.sample(np.sin), 0.0) == pytest.approx(1.0, rel=1e-13)
    assert analytic_norm(g.sample(np.sin), 1.0) == pytest.approx(math.e, rel=1e-13)
    with pytest.raises(ValueError):
        analytic_norm(g.sample(np.sin), -0.1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0, 2), st.floats(0, 2))
def test_analytic_norm_monotone_in_rho(seed, r1, r2):
    g = Grid(32)
    f = g.field(np.random.default_rng(seed).standard_normal(32))
    lo, hi = sorted((r1, r2))
    assert analytic_norm(f, lo) <= analytic_norm(f, hi) * (1 + 1e-14)


def test_seminorm_report():
    rep = seminorm_report(Grid(32).sample(np.sin), radii=(0.0, 1.0))
    assert rep.h_half_sq == pytest.approx(math.pi)
    assert rep.analytic[1.0] == pytest.approx(math.e)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_operators_linear_and_kill_constants(seed):
    rng = np.random.default_rng(seed)
    g = Grid(32)
    a, b = g.field(rng.standard_normal(32)), g.field(rng.standard_normal(32))
    c = g.field(np.full(32, rng.standard_normal()))
    for op in (halflap_spectral, grad_spectral, lambda f: halflap_delta(f, 0.2)):
        np.testing.assert_allclose(op(3.0 * a - b).values, 3.0 * op(a).values - op(b).values,
                                   atol=1e-12)
        assert np.max(np.abs(op(c).values)) <= 1e-12
