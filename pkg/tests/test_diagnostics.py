import math
from types import SimpleNamespace

import numpy as np
import pytest

from nlburgers.diagnostics import (Accumulator, DiagnosticsRecord, analyticity_radius,
                                   bridging_constant, fit_decay, hp_balance, hp_rate,
                                   lp_nonincreasing, momentum_gain_limit, momentum_law_residual,
                                   radius_estimate, recompute, record, spectrum_slices)
from nlburgers.grid import Grid, lp_norm
from nlburgers.integrators import StepControl, evolve
from nlburgers.kernels import PAPER, SPECTRAL

FIGA = lambda x: 2 + np.sin(x) + 0.3 * np.cos(5 * x)  # noqa: E731


def test_record_constant():
    r = record(Grid(64).field(np.full(64, 2.0)), 0.0)
    assert r.energy == pytest.approx(2 * math.sqrt(2 * math.pi), rel=1e-15)
    assert r.momentum == pytest.approx(4 * math.pi, rel=1e-15)
    assert r.A == 0 and r.grad_inf == 0
    assert abs(r.h_half_sq) < 1e-28
    assert r.bkm_acc == 0 and r.hp_acc == {"4": 0.0}


def test_record_sine():
    r = record(Grid(64).sample(lambda x: 2 + np.sin(x)), 0.0)
    assert r.momentum == pytest.approx(4 * math.pi, rel=1e-14)
    assert r.energy == pytest.approx(math.sqrt(2 * math.pi * 4.5), rel=1e-14)
    assert r.A == pytest.approx(2.0, abs=2e-3)
    assert r.h_half_sq == pytest.approx(math.pi, rel=1e-12)  # 2 pi * 2 * (1/2)^2 * |k|
    assert r.lp["2"] == r.energy
    assert set(r.analytic) == {"0", "0.1", "0.5"}


def test_record_figA_energy():
    r = record(Grid(256).sample(FIGA), 0.0)
    assert r.energy / math.sqrt(2 * math.pi) == pytest.approx(0.3 * math.sqrt(101 / 2), rel=1e-14)
    assert r.energy / math.sqrt(2 * math.pi) == pytest.approx(2.1319, abs=1e-4)


def test_record_accumulates_trapezoid():
    g = Grid(32)
    a = record(g.sample(np.sin), 0.0)
    b = record(g.sample(lambda x: 2 * np.sin(x)), 0.5, a)
    assert b.bkm_acc == pytest.approx(0.25 * (a.grad_inf + b.grad_inf), rel=1e-15)
    assert b.h_half_acc == pytest.approx(0.25 * (a.h_half_sq + b.h_half_sq), rel=1e-15)


def test_record_dict_round_trip():
    r = record(Grid(16).sample(FIGA), 0.25)
    d = r.to_dict()
    assert "hp_rate" not in d
    assert DiagnosticsRecord.from_dict(d) == r


def test_accumulator_rejects_unpushed_time():
    acc = Accumulator()
    u = Grid(8).sample(np.cos)
    acc.push(u, 0.0)
    with pytest.raises(ValueError):
        acc.record(u, 0.1)


def test_hp_rate_vanishes_for_constants():
    assert hp_rate(Grid(16).field(np.full(16, 3.0)), 4) == 0.0


def test_hp_rate_nonnegative_for_positive_data():
    # the correction grows, because the L^p norm decays for positive data
    assert hp_rate(Grid(64).sample(FIGA), 4) > 0


def test_bridging_constant():
    assert bridging_constant(PAPER) == pytest.approx(math.pi, rel=1e-15)
    assert bridging_constant(SPECTRAL) == pytest.approx(1.0, rel=1e-15)


# -- trajectory level -----------------------------------------------------------

@pytest.fixture(scope="module")
def figA_run():
    return evolve(Grid(128).sample(FIGA), StepControl(20.0, record_every=10))


def test_recompute_bit_exact():
    tr = evolve(Grid(64).sample(FIGA), StepControl(1.0, record_every=1))
    again = recompute(tr)
    assert [r.to_dict() for r in again] == [r.to_dict() for r in tr.records]


def test_bkm_nondecreasing(figA_run):
    b = [r.bkm_acc for r in figA_run.records]
    assert all(y >= x for x, y in zip(b, b[1:]))
    assert all(np.isfinite(b))


def test_momentum_law_constant():
    tr = evolve(Grid(32).field(np.full(32, 2.0)), StepControl(1.0, record_every=1))
    assert momentum_law_residual(tr) == 0.0


def test_momentum_law_needs_two_records():
    with pytest.raises(ValueError):
        momentum_law_residual(SimpleNamespace(records=[None], spec=SPECTRAL))


@pytest.mark.parametrize("form", ["u_quadrature", "u_spectral"])
def test_momentum_law_calibrated(form):
    u0 = Grid(256).sample(lambda x: 2 + np.sin(x))
    tr = evolve(u0, StepControl(2.0, record_every=1), form)
    gain = tr.records[-1].momentum - tr.records[0].momentum
    assert gain > 0
    assert momentum_law_residual(tr) <= 1e-4 * gain


def test_momentum_law_converges_under_refinement():
    res = []
    for n in (64, 128, 256):
        tr = evolve(Grid(n).sample(lambda x: 2 + np.sin(x)), StepControl(2.0, record_every=1))
        res.append(momentum_law_residual(tr, cumulative=True))
    assert res[0] > res[1] > res[2]


def test_momentum_law_paper_exact_mode_uses_bridging():
    u0 = Grid(128).sample(lambda x: 2 + np.sin(x))
    tr = evolve(u0, StepControl(1.0, record_every=1), "u_quadrature", PAPER)
    gain = tr.records[-1].momentum - tr.records[0].momentum
    assert momentum_law_residual(tr) <= 1e-3 * gain


def test_momentum_total_gain(figA_run):
    u0 = figA_run.states[0]
    gain = figA_run.records[-1].momentum - figA_run.records[0].momentum
    assert gain == pytest.approx(momentum_gain_limit(u0), rel=1e-2)
    m = [r.momentum for r in figA_run.records]
    assert all(b >= a - 1e-12 for a, b in zip(m, m[1:]))


def _synthetic(times, a_vals):
    recs = [SimpleNamespace(A=a) for a in a_vals]
    return SimpleNamespace(times=list(times), records=recs)


def test_fit_decay_synthetic():
    t = np.linspace(0, 5, 51)
    fit = fit_decay(_synthetic(t, np.exp(-3 * t)), window=(0.0, 5.0))
    assert fit.rate == pytest.approx(-3.0, abs=1e-6)
    assert fit.r_squared > 0.999999
    assert fit.window == (0.0, 5.0)


def test_fit_decay_rejects_round_off():
    t = np.linspace(0, 20, 21)
    with pytest.raises(ValueError):
        fit_decay(_synthetic(t, np.exp(-3 * t)), window=(0.0, 20.0))
    with pytest.raises(ValueError):
        fit_decay(_synthetic(t, np.exp(-t)), window=(0.0, 1.5))


def test_fit_decay_figA(figA_run):
    fit = fit_decay(figA_run)
    assert fit.rate < 0 and fit.r_squared > 0.99
    assert 0 <= fit.r_squared <= 1
    tol = 10 * figA_run.tau_max ** 2
    A = [r.A for r in figA_run.records]
    assert all(b <= a + tol for a, b in zip(A, A[1:]))


def test_hp_balance_constant():
    tr = evolve(Grid(32).field(np.full(32, 1.5)), StepControl(1.0, record_every=1))
    assert hp_balance(tr, 4) == 0.0


def test_hp_balance_rejects_small_p():
    with pytest.raises(ValueError):
        hp_balance(None, 2.0)


def test_hp_balance_refinement_order():
    res = []
    for n in (64, 128, 256):
        tr = evolve(Grid(n).sample(lambda x: 2 + np.sin(x)), StepControl(1.0, record_every=1))
        res.append(hp_balance(tr, 4))
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    assert min(orders) >= 1.0, (res, orders)


def test_hp_balance_other_p_is_recomputed():
    tr = evolve(Grid(64).sample(lambda x: 2 + np.sin(x)), StepControl(0.5, record_every=1))
    assert hp_balance(tr, 3) < 1e-2


def test_l4_strictly_decreasing():
    tr = evolve(Grid(128).sample(FIGA), StepControl(5.0, record_every=5))
    norms = [lp_norm(u, 4) for u in tr.states]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert lp_nonincreasing(tr, 4)


def test_spectrum_slices_constant():
    tr = SimpleNamespace(times=[0.0], states=[Grid(16).field(np.full(16, 2.0))])
    rows = spectrum_slices(tr, [0.0])
    assert [k for _, k, a in rows if a > 0] == [0]
    assert len(rows) == 16


def test_spectrum_slices_figA_modes():
    tr = SimpleNamespace(times=[0.0], states=[Grid(64).sample(FIGA)])
    rows = spectrum_slices(tr, [0.0])
    assert {k for _, k, a in rows if a > 1e-14} == {0, 1, -1, 5, -5}
    amp = {k: a for _, k, a in rows}
    assert amp[0] == pytest.approx(2.0) and amp[1] == pytest.approx(0.5)
    assert amp[5] == pytest.approx(0.15)


def test_spectrum_slices_empty():
    with pytest.raises(ValueError):
        spectrum_slices(SimpleNamespace(times=[], states=[]), [0.0])


def test_spectrum_slices_nearest_record(figA_run):
    rows = spectrum_slices(figA_run, [1.03])
    t = rows[0][0]
    assert abs(t - 1.03) <= max(np.diff(figA_run.times))


def test_tail_mass_decreases(figA_run):
    # the resolved part of the smoothing; later the tail sits at round-off
    rows = spectrum_slices(figA_run, [0.25, 0.5, 1.0, 1.5, 2.0])
    tails = {}
    for t, k, a in rows:
        if abs(k) > 10:
            tails[t] = tails.get(t, 0.0) + a
    vals = [tails[t] for t in sorted(tails)]
    assert all(b < a for a, b in zip(vals, vals[1:])), vals


def test_radius_synthetic():
    n = 64
    k = np.fft.fftfreq(n, 1.0 / n)
    uhat = np.exp(-2 * np.abs(k)) * n
    vals = np.real(np.fft.ifft(uhat))
    assert radius_estimate(vals) == pytest.approx(2.0, rel=0.05)


def test_radius_constant_is_inf():
    assert radius_estimate(np.full(32, 3.0)) == math.inf


def test_radius_decreases_before_blowup():
    u0 = Grid(256).sample(lambda x: -FIGA(x))
    tr = evolve(u0, StepControl(1.0, record_every=4, filter_level=1e-13))
    rho = [r for _, r in analyticity_radius(tr)]
    assert rho[0] == math.inf  # two Fourier modes only
    rho = rho[1:]
    assert len(rho) > 10 and all(np.isfinite(rho))
    assert all(b < a for a, b in zip(rho, rho[1:]))
    assert rho[-1] < 0.2 * rho[0]
