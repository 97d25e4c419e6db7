"""Monitored quantities along a trajectory and the laws they must obey.

Time integrals (the BKM accumulator, the integrated half-order seminorm and
the higher-power correction) use the trapezoid rule over every accepted time
step, so their error is set by the step size and not by the record spacing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .grid import Field, extrema, lp_norm
from .kernels import SPECTRAL, KernelMode, KernelSpec
from .operators import analytic_norm, grad, h_half_sq, pv_apply

_FLOOR = 1e-13


def _key(p) -> str:
    p = float(p)
    if math.isinf(p):
        return "inf"
    return str(int(p)) if p.is_integer() else repr(p)


@dataclass(frozen=True)
class RecordSettings:
    lp_orders: tuple = (2.0, 4.0, math.inf)
    radii: tuple = (0.0, 0.1, 0.5)
    hp_orders: tuple = (4.0,)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float
    momentum: float
    m: float
    M: float
    A: float
    h_half_sq: float
    grad_inf: float
    bkm_acc: float
    h_half_acc: float
    lp: dict
    analytic: dict
    hp_acc: dict
    hp_rate: dict = field(default_factory=dict, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "hp_rate"}

    @classmethod
    def from_dict(cls, d: dict) -> "DiagnosticsRecord":
        names = [f.name for f in fields(cls) if f.name != "hp_rate"]
        return cls(**{k: d[k] for k in names})


def hp_rate(u: Field, p: float, spec: KernelSpec = SPECTRAL) -> float:
    """Integrand of the higher-power law correction at one instant.

    ``(p/2) iint u(x)u(y)(|u(y)|^{p-2} - |u(x)|^{p-2})(u(y) - u(x)) K dx dy``,
    written through the quadrature of ``pv_apply`` as
    ``-p delta sum_i |u_i|^{p-2} u_i pv_apply(u, u)_i``.
    """
    v = u.values
    q = pv_apply(u, u, spec).values
    return float(-p * u.grid.mesh * np.dot(np.abs(v) ** (p - 2.0) * v, q))


def _rates(u: Field, spec: KernelSpec, settings: RecordSettings):
    g = float(np.max(np.abs(grad(u.values))))
    return g, h_half_sq(u.values), {_key(p): hp_rate(u, p, spec) for p in settings.hp_orders}


def _make(u, t, rates, bkm, hacc, hp, settings):
    v = u.values
    m, M, A = extrema(u)
    g, h, r = rates
    return DiagnosticsRecord(
        t=float(t), energy=lp_norm(u, 2), momentum=float(u.grid.mesh * np.sum(v)),
        m=m, M=M, A=A, h_half_sq=h, grad_inf=g, bkm_acc=bkm, h_half_acc=hacc,
        lp={_key(p): lp_norm(u, p) for p in settings.lp_orders},
        analytic={_key(rho): analytic_norm(u, rho) for rho in settings.radii},
        hp_acc=dict(hp), hp_rate=r)


def record(u: Field, t: float, prev: DiagnosticsRecord | None = None,
           spec: KernelSpec = SPECTRAL,
           settings: RecordSettings = RecordSettings()) -> DiagnosticsRecord:
    """Diagnostics of ``u`` at time ``t``, integrals continued from ``prev``.

    The time integrals advance by one trapezoid over ``[prev.t, t]``; use
    :class:`Accumulator` to integrate at every time step instead.
    """
    acc = Accumulator(spec, settings)
    if prev is not None:
        acc.t = prev.t
        acc.last = (prev.grad_inf, prev.h_half_sq, prev.hp_rate)
        acc.bkm, acc.hacc, acc.hp = prev.bkm_acc, prev.h_half_acc, dict(prev.hp_acc)
    acc.push(u, t)
    return acc.record(u, t)


class Accumulator:
    """Trapezoid integrals of ``|grad u|_inf``, ``h_half_sq`` and the (HP) rates.

    Call :meth:`push` on every accepted state (time step resolution) and
    :meth:`record` on the states to be reported.
    """

    def __init__(self, spec: KernelSpec = SPECTRAL, settings: RecordSettings = RecordSettings()):
        self.spec = spec
        self.settings = settings
        self.t = None
        self.last = None
        self.bkm = 0.0
        self.hacc = 0.0
        self.hp = {_key(p): 0.0 for p in settings.hp_orders}

    def push(self, u: Field, t: float):
        rates = _rates(u, self.spec, self.settings)
        if self.t is not None:
            dt = t - self.t
            g0, h0, r0 = self.last
            self.bkm += 0.5 * dt * (g0 + rates[0])
            self.hacc += 0.5 * dt * (h0 + rates[1])
            for k, r in rates[2].items():
                self.hp[k] += 0.5 * dt * (r0[k] + r)
        self.t, self.last = float(t), rates

    def record(self, u: Field, t: float) -> DiagnosticsRecord:
        if self.t != float(t):
            raise ValueError(f"record at t = {t} but the last pushed state is at {self.t}")
        return _make(u, t, self.last, self.bkm, self.hacc, self.hp, self.settings)


def recompute(traj, settings: RecordSettings = RecordSettings()) -> list:
    """Rebuild all records from the stored states (record-level integrals)."""
    out = []
    for t, u in zip(traj.times, traj.states):
        out.append(record(u, t, out[-1] if out else None, traj.spec, settings))
    return out


# -- laws -------------------------------------------------------------------

def bridging_constant(spec: KernelSpec) -> float:
    """Factor multiplying the spectral H^{1/2} seminorm in the momentum law."""
    return spec.symbol_scale


def momentum_law_residual(traj, cumulative: bool = False) -> float:
    """Max over record intervals of ``|d momentum - c d h_half_acc|``.

    ``h_half_acc`` is the running time integral of the squared half-order
    seminorm, so the time quadrature error is that of the integrator's steps,
    not of the record spacing. With ``cumulative=True`` the residual is taken
    from t = 0 instead, i.e. the max over t of
    ``|momentum(t) - momentum(0) - c h_half_acc(t)|``.
    """
    recs = traj.records
    if len(recs) < 2:
        raise ValueError("momentum law needs at least two records")
    c = bridging_constant(traj.spec)
    worst = 0.0
    acc = 0.0
    for a, b in zip(recs, recs[1:]):
        r = (b.momentum - a.momentum) - c * (b.h_half_acc - a.h_half_acc)
        acc += r
        worst = max(worst, abs(acc) if cumulative else abs(r))
    return worst


def momentum_gain_limit(u0: Field) -> float:
    """``sqrt(2 pi) |u0|_2 - int u0``: total momentum gained as t -> infinity."""
    return math.sqrt(2.0 * math.pi) * lp_norm(u0, 2) - u0.grid.mesh * float(np.sum(u0.values))


@dataclass(frozen=True)
class DecayFit:
    rate: float
    window: tuple
    r_squared: float


def _linfit(t, y):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), min(max(r2, 0.0), 1.0)


def default_decay_window(traj, quantity: str = "A") -> tuple:
    """Second half of the span over which ``quantity`` stays resolved.

    The amplitude of a converging run reaches round-off well before the end,
    so the window ends at the last record with the quantity above 1e-11.
    """
    vals = [getattr(r, quantity) for r in traj.records]
    times = traj.times
    resolved = [t for t, a in zip(times, vals) if a > 1e-11]
    if len(resolved) < 2:
        raise ValueError(f"{quantity} is below round-off along the whole run")
    t_hi = resolved[-1]
    return (0.5 * t_hi, t_hi)


def fit_decay(traj, window=None, quantity: str = "A") -> DecayFit:
    """Least-squares slope of ``log quantity(t)`` over ``window``."""
    if window is None:
        window = default_decay_window(traj, quantity)
    lo, hi = window
    pts = [(t, getattr(r, quantity)) for t, r in zip(traj.times, traj.records) if lo <= t <= hi]
    if len(pts) < 3:
        raise ValueError(f"decay window {window} holds fewer than 3 records")
    if any(a < _FLOOR for _, a in pts):
        raise ValueError(f"{quantity} drops below {_FLOOR:g} inside the window {window}")
    t, a = zip(*pts)
    rate, r2 = _linfit(t, np.log(a))
    return DecayFit(rate, (float(lo), float(hi)), r2)


def hp_balance(traj, p: float = 4.0) -> float:
    """Max over records of ``|‖u(t)‖_p^p + correction(t) - ‖u0‖_p^p|``."""
    if not p > 2:
        raise ValueError(f"higher-power law needs p > 2, got {p}")
    key = _key(p)
    recs = traj.records
    if key not in recs[0].hp_acc:
        recs = recompute(traj, RecordSettings(lp_orders=(p,), radii=(), hp_orders=(p,)))
    base = lp_norm(traj.states[0], p) ** p
    return max(abs(lp_norm(u, p) ** p + r.hp_acc[key] - base)
               for u, r in zip(traj.states, recs))


def lp_nonincreasing(traj, p: float, tol: float = 0.0) -> bool:
    norms = [lp_norm(u, p) for u in traj.states]
    return all(b <= a + tol for a, b in zip(norms, norms[1:]))


def spectrum_slices(traj, times) -> list:
    """Rows ``(t, k, |uhat(k)|)`` at the records nearest to ``times``."""
    if not traj.states:
        raise ValueError("empty trajectory")
    rec_t = np.asarray(traj.times)
    rows = []
    for t in times:
        i = int(np.argmin(np.abs(rec_t - t)))
        u = traj.states[i]
        n = u.grid.n
        a = np.abs(np.fft.fftshift(np.fft.fft(u.values))) / n
        rows.extend((float(rec_t[i]), int(k), float(v))
                    for k, v in zip(range(-n // 2, n // 2), a))
    return rows


def radius_estimate(values: np.ndarray) -> float:
    """Slope of ``-log|uhat(k)|`` against k over the resolved modes.

    Uses k = 1..n/2-1 with ``|uhat(k)| > 1e-13``; fewer than three such modes
    (constants, short trigonometric polynomials) give ``inf``.
    """
    n = values.shape[0]
    a = np.abs(np.fft.rfft(values))[1:n // 2] / n
    k = np.arange(1, n // 2)
    keep = a > _FLOOR
    if keep.sum() < 3:
        return math.inf
    slope, _ = _linfit(k[keep], -np.log(a[keep]))
    return slope


def analyticity_radius(traj) -> list:
    return [(float(t), radius_estimate(u.values)) for t, u in zip(traj.times, traj.states)]


def spec_from_meta(meta: dict) -> KernelSpec:
    return KernelSpec(KernelMode.parse(meta.get("kernel_mode", "spectrally_consistent")))
