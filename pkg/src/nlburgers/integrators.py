"""Explicit time stepping, CFL control and the blow-up guard."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import diagnostics
from .dynamics import EquationForm, Formulation, formulation
from .grid import Field
from .kernels import SPECTRAL, KernelSpec, total_weight
from .operators import grad


class Status(str, enum.Enum):
    COMPLETED = "completed"
    BLOWUP = "blowup_detected"
    ABORTED = "aborted"


@dataclass(frozen=True)
class StepControl:
    """``tau=None`` selects the CFL step, recomputed every step.

    ``filter_level > 0`` zeroes, after every step, the Fourier modes of the
    evolved state whose normalised modulus falls below it. Negative data make
    the linearised flow grow mode k like exp(2|k|t), so without the filter
    round-off in the top modes reaches O(1) after a time of order 1/n and the
    guard trips on noise rather than on the solution.
    """

    t_end: float
    scheme: str = "rk4"
    tau: Optional[float] = None
    safety: float = 0.5
    record_every: int = 1
    tau_max: float = 0.1
    max_steps: int = 50_000_000
    filter_level: float = 0.0

    def __post_init__(self):
        if self.scheme not in ("euler", "rk4"):
            raise ValueError(f"scheme must be 'euler' or 'rk4', got {self.scheme!r}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.tau is not None and not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0 < self.safety <= 1:
            raise ValueError(f"safety must lie in (0, 1], got {self.safety}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every}")
        if not self.tau_max > 0:
            raise ValueError(f"tau_max must be positive, got {self.tau_max}")
        if not self.filter_level >= 0:
            raise ValueError(f"filter_level must be nonnegative, got {self.filter_level}")


@dataclass(frozen=True)
class Guards:
    """Blow-up thresholds.

    ``amp`` and ``grad`` multiply the initial sup norm of u and of its
    gradient (each floored at 1); ``tail`` bounds the share of the
    l1 spectrum above |k| = n/4. ``None`` disables a check.
    """

    amp: Optional[float] = 1e3
    grad: Optional[float] = 1e4
    tail: Optional[float] = 0.1


@dataclass
class Trajectory:
    times: list
    states: list
    records: list
    status: Status
    meta: dict
    spec: KernelSpec = SPECTRAL
    form: EquationForm = EquationForm.U_QUADRATURE
    reason: str = ""
    steps: int = 0
    tau_min: float = math.inf
    tau_max: float = 0.0

    @property
    def grid(self):
        return self.states[0].grid


def cfl_timestep(u: Field, spec: KernelSpec = SPECTRAL, safety: float = 0.5,
                 tau_max: float = 0.1, norm_factor: float = 1.0) -> float:
    """``safety / (|u|_inf * W)`` with ``W = delta * sum_{j != 0} K_per(j delta)``.

    ``W`` grows like 1/delta, so the step scales like ``delta / |u|_inf``.
    """
    umax = float(np.max(np.abs(u.values)))
    if umax == 0.0:
        return tau_max
    W = total_weight(u.grid, spec) * norm_factor
    return min(tau_max, safety / (umax * W))


def _advance(sys: Formulation, y: np.ndarray, tau: float, scheme: str) -> np.ndarray:
    f = sys.rhs
    if scheme == "euler":
        return y + tau * f(y)
    k1 = f(y)
    k2 = f(y + (0.5 * tau) * k1)
    k3 = f(y + (0.5 * tau) * k2)
    k4 = f(y + tau * k3)
    return y + (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(u: Field, tau: float, form=EquationForm.U_QUADRATURE,
         spec: KernelSpec = SPECTRAL, scheme: str = "rk4") -> Field:
    """One explicit step from ``u``; scheme is 'euler' or 'rk4'."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    sys = formulation(form, u.grid, spec)
    y = _advance(sys, sys.encode(u.values), tau, scheme)
    return Field(u.grid, sys.decode(y))


def tail_ratio(values: np.ndarray) -> float:
    n = values.shape[0]
    a = np.abs(np.fft.fft(values))
    k = np.abs(np.fft.fftfreq(n, 1.0 / n))
    total = a.sum()
    return float(a[k > n / 4].sum() / total) if total > 0 else 0.0


def _trip(u, thresholds, guards):
    if not np.all(np.isfinite(u)):
        return "non-finite values"
    amp_thr, grad_thr = thresholds
    umax = float(np.max(np.abs(u)))
    if amp_thr is not None and umax > amp_thr:
        return f"|u|_inf = {umax:.6g} exceeds {amp_thr:.6g}"
    if grad_thr is not None:
        g = float(np.max(np.abs(grad(u))))
        if g > grad_thr:
            return f"|grad u|_inf = {g:.6g} exceeds {grad_thr:.6g}"
    if guards.tail is not None:
        r = tail_ratio(u)
        if r > guards.tail:
            return f"spectral tail ratio {r:.6g} exceeds {guards.tail:.6g}"
    return ""


def evolve(u0: Field, ctrl: StepControl, form=EquationForm.U_QUADRATURE,
           spec: KernelSpec = SPECTRAL, guards: Guards = Guards(),
           settings: diagnostics.RecordSettings = diagnostics.RecordSettings(),
           on_record: Optional[Callable] = None, meta: Optional[dict] = None) -> Trajectory:
    """Integrate to ``ctrl.t_end`` or until a guard trips.

    A diagnostics record is taken at t = 0, every ``record_every`` steps and
    at the final time. When a guard trips, the tripping state is recorded if
    it is finite, otherwise the last finite state is.
    """
    form = EquationForm.parse(form)
    sys = formulation(form, u0.grid, spec)
    grid = u0.grid
    y = sys.encode(u0.values)

    u0max = float(np.max(np.abs(u0.values)))
    g0 = float(np.max(np.abs(grad(u0.values))))
    thresholds = (None if guards.amp is None else guards.amp * max(u0max, 1.0),
                  None if guards.grad is None else guards.grad * max(g0, 1.0))

    traj = Trajectory([], [], [], Status.COMPLETED, dict(meta or {}), spec=spec, form=form)
    traj.meta.setdefault("form", form.value)
    traj.meta.setdefault("kernel_mode", spec.mode.value)

    acc = diagnostics.Accumulator(spec, settings)

    def take(t, uvals, pushed=True):
        field_ = Field(grid, uvals)
        if not pushed:
            acc.push(field_, t)
        rec = acc.record(field_, t)
        traj.times.append(t)
        traj.states.append(field_)
        traj.records.append(rec)
        if on_record is not None:
            on_record(t, field_, rec)

    t = 0.0
    take(t, sys.decode(y), pushed=False)
    nstep = 0
    last_recorded = 0
    while t < ctrl.t_end:
        if nstep >= ctrl.max_steps:
            traj.status = Status.ABORTED
            traj.reason = f"step budget of {ctrl.max_steps} exhausted at t = {t:.6g}"
            break
        u = sys.decode(y)
        if ctrl.tau is None:
            tau = cfl_timestep(Field(grid, u), spec, ctrl.safety, ctrl.tau_max, sys.norm_factor)
        else:
            tau = ctrl.tau
        last = t + tau >= ctrl.t_end * (1.0 - 1e-14)
        if last:
            tau = ctrl.t_end - t
        try:
            y_new = _advance(sys, y, tau, ctrl.scheme)
            if ctrl.filter_level > 0:
                y_new = sys.filter(y_new, ctrl.filter_level)
            u_new = sys.decode(y_new)
            reason = _trip(u_new, thresholds, guards)
        except (ValueError, FloatingPointError) as exc:
            y_new, u_new, reason = None, None, f"state left the admissible set: {exc}"
        nstep += 1
        t_new = ctrl.t_end if last else t + tau
        traj.tau_min = min(traj.tau_min, tau)
        traj.tau_max = max(traj.tau_max, tau)
        if reason:
            traj.status = Status.BLOWUP
            traj.reason = f"{reason} at t = {t_new:.6g}"
            if u_new is not None and np.all(np.isfinite(u_new)):
                take(t_new, u_new, pushed=False)
            elif last_recorded != nstep - 1:
                take(t, u)
            break
        y, t = y_new, t_new
        acc.push(Field(grid, u_new), t)
        if nstep % ctrl.record_every == 0 or last:
            take(t, u_new)
            last_recorded = nstep
    traj.steps = nstep
    return traj
