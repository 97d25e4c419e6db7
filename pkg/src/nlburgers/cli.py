"""Command-line driver: run a scenario, write its outputs, check a finished run.

Usage::

    nlburgers run --scenario figA_smooth --n 256 --t-end 20 --out runs/a
    nlburgers verify --run runs/a
    nlburgers presets

Every output file starts with ``# config: <json>``; that line alone is enough
to repeat the run. Diagnostics are streamed as NDJSON (one record per line,
flushed as produced), closed by a status object.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .config import ConfigError, RunConfig, header_line, parse_header
from .diagnostics import DiagnosticsRecord
from .dynamics import EquationForm, fem_assemble
from .grid import Field, Grid, lp_norm
from .integrators import Guards, Status, StepControl, Trajectory, evolve
from .kernels import KernelMode, KernelSpec
from .presets import initial_values, preset, preset_names

TRAJECTORY = "trajectory.csv"
DIAGNOSTICS = "diagnostics.ndjson"
SPECTRA = "spectra.csv"


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class RunResult:
    exit_code: int
    trajectory: Trajectory
    config: RunConfig
    files: dict = field(default_factory=dict)


class _Writers:
    def __init__(self, cfg: RunConfig, n: int):
        self.cfg = cfg
        self.files = {}
        self.handles = {}
        os.makedirs(cfg.out, exist_ok=True)
        head = header_line(cfg)
        layout = {
            "trajectory": (TRAJECTORY, "t," + ",".join(f"x_{i}" for i in range(n)) + "\n"),
            "diagnostics": (DIAGNOSTICS, ""),
            "spectra": (SPECTRA, "t,k,abs_uhat\n"),
        }
        for kind in cfg.emit:
            name, cols = layout[kind]
            path = os.path.join(cfg.out, name)
            fh = open(path, "w", encoding="utf-8", newline="\n")
            fh.write(head + cols)
            self.files[kind] = path
            self.handles[kind] = fh

    def record(self, t, u: Field, rec: DiagnosticsRecord):
        h = self.handles
        if "trajectory" in h:
            h["trajectory"].write(_fmt(t) + "," + ",".join(map(_fmt, u.values)) + "\n")
            h["trajectory"].flush()
        if "diagnostics" in h:
            h["diagnostics"].write(json.dumps(rec.to_dict(), sort_keys=False) + "\n")
            h["diagnostics"].flush()
        if "spectra" in h:
            n = u.grid.n
            a = np.abs(np.fft.fftshift(np.fft.fft(u.values))) / n
            ts = _fmt(t)
            h["spectra"].write("".join(f"{ts},{k},{_fmt(v)}\n"
                                       for k, v in zip(range(-n // 2, n // 2), a)))
            h["spectra"].flush()

    def close(self, traj: Trajectory):
        if "diagnostics" in self.handles:
            status = {"status": traj.status.value, "reason": traj.reason, "steps": traj.steps,
                      "tau_min": traj.tau_min, "tau_max": traj.tau_max}
            self.handles["diagnostics"].write(json.dumps(status) + "\n")
        for fh in self.handles.values():
            fh.close()


def simulate(cfg: RunConfig, on_record=None) -> Trajectory:
    """Integrate a resolved config without touching the filesystem."""
    cfg = cfg.resolved()
    grid = Grid(cfg.n)
    u0 = Field(grid, initial_values(cfg.scenario, grid.nodes))
    ctrl = StepControl(t_end=cfg.t_end, scheme=cfg.scheme, tau=cfg.tau, safety=cfg.safety,
                       record_every=cfg.record_every, tau_max=cfg.tau_max,
                       filter_level=cfg.filter_level)
    guards = Guards(cfg.guard_amp, cfg.guard_grad, cfg.guard_tail)
    spec = KernelSpec(KernelMode.parse(cfg.kernel_mode))
    return evolve(u0, ctrl, cfg.form, spec, guards, on_record=on_record, meta=cfg.to_dict())


def run(cfg: RunConfig) -> RunResult:
    """Run ``cfg`` and write the requested files into ``cfg.out``.

    Returns exit code 0 for completed and blow-up runs, 1 for aborted ones.
    """
    cfg = cfg.resolved()
    writers = _Writers(cfg, cfg.n)
    try:
        traj = simulate(cfg, on_record=writers.record)
    except BaseException:
        for fh in writers.handles.values():
            fh.close()
        raise
    writers.close(traj)
    code = 1 if traj.status is Status.ABORTED else 0
    return RunResult(code, traj, cfg, dict(writers.files))


# -- verification -----------------------------------------------------------

def _read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def load_run(run_dir: str):
    """Read a run directory back. Returns ``(config, trajectory, problems)``.

    Missing or unreadable files are listed in ``problems`` rather than raised;
    the trajectory then lacks the corresponding data.
    """
    problems = {}
    cfg = None
    states, times, records, status = [], [], [], {}
    p = os.path.join(run_dir, DIAGNOSTICS)
    if os.path.isfile(p):
        lines = _read_lines(p)
        try:
            cfg = parse_header(lines[0])
            for ln in lines[1:]:
                obj = json.loads(ln)
                if "status" in obj:
                    status = obj
                else:
                    records.append(DiagnosticsRecord.from_dict(obj))
        except (ValueError, KeyError, IndexError) as exc:
            problems[DIAGNOSTICS] = f"unreadable: {exc}"
    else:
        problems[DIAGNOSTICS] = "missing"
    p = os.path.join(run_dir, TRAJECTORY)
    if os.path.isfile(p):
        lines = _read_lines(p)
        try:
            c2 = parse_header(lines[0])
            cfg = cfg or c2
            if c2 != cfg:
                problems[TRAJECTORY] = "config header differs from diagnostics"
            grid = Grid(cfg.n)
            for ln in lines[2:]:
                vals = [float(v) for v in ln.split(",")]
                times.append(vals[0])
                states.append(Field(grid, vals[1:]))
        except (ValueError, IndexError) as exc:
            problems[TRAJECTORY] = f"unreadable: {exc}"
            states, times = [], []
    else:
        problems[TRAJECTORY] = "missing"
    if cfg is None:
        return None, None, problems
    if not records and states:
        spec = KernelSpec(KernelMode.parse(cfg.kernel_mode))
        for t, u in zip(times, states):
            records.append(diagnostics.record(u, t, records[-1] if records else None, spec))
    if not times:
        times = [r.t for r in records]
    traj = Trajectory(times, states, records,
                      Status(status.get("status", "completed")), cfg.to_dict(),
                      spec=KernelSpec(KernelMode.parse(cfg.kernel_mode)),
                      form=EquationForm.parse(cfg.form),
                      reason=status.get("reason", ""), steps=status.get("steps", 0),
                      tau_min=status.get("tau_min", math.inf),
                      tau_max=status.get("tau_max", 0.0))
    return cfg, traj, problems


def _law(ok, value, tol, **extra):
    if ok is None:
        status = "not_applicable"
    else:
        status = "pass" if ok else "fail"
    out = {"status": status, "value": value, "tol": tol}
    out.update(extra)
    return out


# Forms whose right-hand side is a Fourier multiplier. The momentum law holds
# for them up to time stepping error; the quadrature forms carry an O(delta)
# bias between the kernel sum and the |k| symbol. The (HP) integrand is a
# kernel sum, so the roles swap there.
_SPECTRAL_FORMS = (EquationForm.U_SPECTRAL, EquationForm.V_FLUCTUATION)


def verify_trajectory(traj: Trajectory, cfg: RunConfig) -> dict:
    """Check every monitored law on a finished trajectory."""
    recs = traj.records
    form = EquationForm.parse(cfg.form)
    laws = {}
    # records strictly before a guard trip: the tripping state is under-resolved
    good = recs if traj.status is Status.COMPLETED else recs[:-1] or recs
    good_states = traj.states[:len(good)] if traj.states else []
    tiny = 1e-12

    # (E) energy
    if form is EquationForm.FEM and good_states:
        fem = fem_assemble(good_states[0].grid)
        en = [fem.energy(u.values) for u in good_states]
        label = "U^T A U"
    else:
        en = [r.energy ** 2 for r in good]
        label = "L2 norm squared"
    e0 = en[0]
    drift = max(abs(e - e0) for e in en) / max(e0, tiny)
    tol_e = 1e-6 if cfg.scheme == "rk4" else 1e-2
    laws["E"] = _law(drift <= tol_e, drift, tol_e, measure=f"relative drift of {label}")

    # (ML) momentum
    mom = [r.momentum for r in good]
    if form is EquationForm.FROZEN:
        d = max(abs(m - mom[0]) for m in mom)
        tol_m = 1e-10 * max(1.0, max(abs(r.lp["2"]) for r in good))
        laws["ML"] = _law(d <= tol_m, d, tol_m, measure="momentum drift (conserved)")
    elif len(good) >= 2:
        sub = Trajectory([r.t for r in good], good_states, good, traj.status, traj.meta,
                         traj.spec, form)
        res = diagnostics.momentum_law_residual(sub)
        gain = mom[-1] - mom[0]
        tol_m = 1e-3 if form in _SPECTRAL_FORMS else 1e-2
        slack = 1e-12 * max(1.0, abs(mom[0]))
        monotone = all(b >= a - slack for a, b in zip(mom, mom[1:]))
        laws["ML"] = _law(res <= tol_m * abs(gain) + tiny and monotone,
                          res / max(abs(gain), tiny), tol_m, gain=gain,
                          momentum_nondecreasing=monotone,
                          measure="per-interval residual / total gain")
    else:
        laws["ML"] = _law(None, None, None, measure="fewer than two records")

    # (MP) / (AMP)
    tmax = traj.tau_max if traj.tau_max > 0 else cfg.tau_max
    tol_mp = 10.0 * tmax ** 2
    m0, M0 = good[0].m, good[0].M
    Ms = [r.M for r in good]
    ms = [r.m for r in good]
    nonincr = all(b <= a + tol_mp for a, b in zip(Ms, Ms[1:]))
    nondecr = all(b >= a - tol_mp for a, b in zip(ms, ms[1:]))
    if m0 > 0:
        laws["MP"] = _law(nonincr and nondecr, float(max(np.diff(Ms).max(initial=0.0),
                                                         -np.diff(ms).min(initial=0.0))), tol_mp)
    else:
        laws["MP"] = _law(None, None, tol_mp, measure="needs positive data")
    if M0 < 0:
        grows = all(b >= a - tol_mp for a, b in zip(Ms, Ms[1:])) and \
            all(b <= a + tol_mp for a, b in zip(ms, ms[1:]))
        laws["AMP"] = _law(grows, None, tol_mp, measure="max increasing, min decreasing")
    else:
        laws["AMP"] = _law(None, None, tol_mp, measure="needs negative data")

    # (HP) higher power
    if good_states and form is not EquationForm.FROZEN:
        sub = Trajectory([r.t for r in good], good_states, good, traj.status, traj.meta,
                         traj.spec, form)
        bal = diagnostics.hp_balance(sub, 4.0)
        scale = max(lp_norm(good_states[0], 4.0) ** 4, tiny)
        tol_h = 1e-2 if form in _SPECTRAL_FORMS else 1e-3
        extra = {}
        ok = bal / scale <= tol_h
        if m0 > 0:
            # (HP) makes every L^p norm, p > 2, nonincreasing for positive data
            decreasing = diagnostics.lp_nonincreasing(sub, 4.0, tol=1e-12 * scale)
            extra["lp4_nonincreasing"] = decreasing
            ok = ok and decreasing
        laws["HP"] = _law(ok, bal / scale, tol_h, p=4,
                          measure="balance residual / |u0|_4^4", **extra)
    else:
        laws["HP"] = _law(None, None, None, measure="needs states of a non-frozen run")

    # decay fit
    if m0 > 0 and traj.status is Status.COMPLETED and good[0].A > 1e-11:
        try:
            fit = diagnostics.fit_decay(traj)
            ok = fit.rate < 0 and fit.r_squared > 0.99 and \
                all(r.A <= good[0].A * (1 + 1e-9) + tiny for r in good)
            laws["decay"] = _law(ok, fit.rate, None, r_squared=fit.r_squared,
                                 window=list(fit.window))
        except ValueError as exc:
            # too few resolved records to fit: nothing to judge
            laws["decay"] = _law(None, None, None, measure=str(exc))
    else:
        laws["decay"] = _law(None, None, None, measure="needs positive non-constant data")

    # BKM accumulator
    acc = [r.bkm_acc for r in recs]
    ok = all(map(math.isfinite, acc)) and all(b >= a for a, b in zip(acc, acc[1:]))
    laws["BKM"] = _law(ok, acc[-1], None, growth_last_10pct=bkm_growth(traj),
                       measure="time integral of |grad u|_inf, finite and nondecreasing")
    return laws


def bkm_growth(traj: Trajectory, frac: float = 0.1) -> float:
    """``bkm_acc(T) / bkm_acc((1 - frac) T)`` with T the last record time."""
    t = np.asarray(traj.times, dtype=float)
    acc = np.asarray([r.bkm_acc for r in traj.records])
    T = t[-1]
    ref = np.interp((1.0 - frac) * T, t, acc)
    return float(acc[-1] / ref) if ref > 0 else math.inf


def verify(run_dir: str) -> dict:
    cfg, traj, problems = load_run(run_dir)
    report = {"run": run_dir, "missing": problems}
    if cfg is None or not traj.records:
        report["ok"] = False
        report["laws"] = {}
        return report
    report["status"] = traj.status.value
    report["scenario"] = cfg.scenario
    report["form"] = cfg.form
    report["laws"] = verify_trajectory(traj, cfg)
    report["ok"] = not problems and all(v["status"] != "fail" for v in report["laws"].values())
    return report


# -- argument parsing -------------------------------------------------------

_FLAG_KEYS = {
    "scenario": str, "n": int, "scheme": str, "tau": None, "safety": float,
    "tau_max": float, "t_end": float, "record_every": int, "form": str,
    "kernel_mode": str, "guard_amp": float, "guard_grad": float,
    "guard_tail": float, "filter_level": float, "out": str, "emit": None,
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlburgers",
                                 description="Non-local Burgers equation on the circle.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="integrate a scenario and write its outputs")
    r.add_argument("--config", help="flat JSON file with RunConfig keys; flags override it")
    for key, typ in _FLAG_KEYS.items():
        flag = "--" + key.replace("_", "-")
        if key == "tau":
            r.add_argument(flag, help="fixed step, or 'auto' for the CFL step")
        elif key == "emit":
            r.add_argument(flag, help="comma-separated subset of trajectory,diagnostics,spectra")
        else:
            r.add_argument(flag, type=typ)
    v = sub.add_parser("verify", help="check the conservation laws of a finished run")
    v.add_argument("--run", required=True, help="output directory of a previous run")
    sub.add_parser("presets", help="list the built-in scenarios")
    return ap


def _config_from_args(args) -> RunConfig:
    base = {}
    text = None
    source = "command line"
    if args.config:
        source = args.config
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file ({exc.strerror})", source=args.config)
        try:
            base = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, exc.lineno, args.config) from None
        if not isinstance(base, dict):
            raise ConfigError("top level must be a JSON object", 1, args.config)
    overridden = set()
    for key in _FLAG_KEYS:
        val = getattr(args, key)
        if val is None:
            continue
        if key == "tau":
            if val.strip().lower() == "auto":
                val = None
            else:
                try:
                    val = float(val)
                except ValueError:
                    raise ConfigError(f"expected a number or 'auto', got {val!r}",
                                      source="command line", key="tau") from None
        elif key == "emit":
            val = [s.strip() for s in val.split(",") if s.strip()]
        base[key] = val
        overridden.add(key)
    try:
        return RunConfig.from_dict(base, text, source)
    except ConfigError as exc:
        if exc.key in overridden:
            raise ConfigError(exc.message, source="command line", key=exc.key) from None
        raise


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "presets":
        for name in preset_names():
            p = preset(name)
            print(f"{name:16s} n={p.n:<4d} t_end={p.t_end:<5g} form={p.form:13s} {p.formula}")
        return 0
    if args.command == "verify":
        report = verify(args.run)
        print(json.dumps(report, indent=2, default=float))
        return 0 if report["ok"] else 1
    try:
        cfg = _config_from_args(args)
        cfg.resolved()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run(cfg)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    traj = result.trajectory
    print(f"{traj.status.value}: {traj.steps} steps, t = {traj.times[-1]:.6g}"
          + (f" ({traj.reason})" if traj.reason else ""))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
