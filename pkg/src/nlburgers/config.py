"""Run configuration: validation, flat JSON (de)serialisation, preset resolution."""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from .dynamics import EquationForm
from .kernels import KernelMode
from .presets import _PRESETS, compile_expression

EMIT_CHOICES = ("diagnostics", "spectra", "trajectory")


class ConfigError(ValueError):
    """Invalid configuration; ``line`` points into the source text when known."""

    def __init__(self, message: str, line: Optional[int] = None,
                 source: str = "config", key: Optional[str] = None):
        self.message = message
        self.line = line
        self.source = source
        self.key = key
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + (f"{key}: " if key else "") + message)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run.

    ``None`` in ``n``, ``t_end``, ``form``, ``filter_level`` or a guard
    means "take it from the preset" (or the package default for inline
    expressions); ``tau=None`` selects the adaptive CFL step.
    """

    scenario: str = "figA_smooth"
    n: Optional[int] = None
    scheme: str = "rk4"
    tau: Optional[float] = None
    safety: float = 0.5
    tau_max: float = 0.1
    t_end: Optional[float] = None
    record_every: int = 10
    form: Optional[str] = None
    kernel_mode: str = "spectrally_consistent"
    guard_amp: Optional[float] = None
    guard_grad: Optional[float] = None
    guard_tail: Optional[float] = None
    filter_level: Optional[float] = None
    out: str = "run"
    emit: tuple = EMIT_CHOICES

    def __post_init__(self):
        object.__setattr__(self, "emit", tuple(sorted(set(self.emit))))
        self.validate()

    # -- validation ---------------------------------------------------------
    def validate(self):
        def bad(key, msg):
            raise ConfigError(msg, key=key)

        if not isinstance(self.scenario, str) or not self.scenario.strip():
            bad("scenario", "must be a non-empty string")
        if self.n is not None:
            if isinstance(self.n, bool) or not isinstance(self.n, int):
                bad("n", f"must be an integer, got {self.n!r}")
            if self.n < 4 or self.n % 2:
                bad("n", f"must be even and at least 4, got {self.n}")
        if self.scheme not in ("euler", "rk4"):
            bad("scheme", f"must be 'euler' or 'rk4', got {self.scheme!r}")
        for key in ("tau", "t_end", "tau_max", "guard_amp", "guard_grad", "guard_tail"):
            v = getattr(self, key)
            if v is None and key != "tau_max":
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 \
                    or v != v or v == float("inf"):
                bad(key, f"must be a positive finite number, got {v!r}")
        if self.filter_level is not None and (
                isinstance(self.filter_level, bool)
                or not isinstance(self.filter_level, (int, float))
                or not 0 <= self.filter_level < float("inf")):
            bad("filter_level", f"must be a nonnegative number, got {self.filter_level!r}")
        if isinstance(self.safety, bool) or not isinstance(self.safety, (int, float)) \
                or not 0 < self.safety <= 1:
            bad("safety", f"must lie in (0, 1], got {self.safety!r}")
        if isinstance(self.record_every, bool) or not isinstance(self.record_every, int) \
                or self.record_every < 1:
            bad("record_every", f"must be a positive integer, got {self.record_every!r}")
        if self.form is not None:
            try:
                EquationForm.parse(self.form)
            except ValueError as exc:
                bad("form", str(exc))
        try:
            KernelMode.parse(self.kernel_mode)
        except ValueError as exc:
            bad("kernel_mode", str(exc))
        unknown = set(self.emit) - set(EMIT_CHOICES)
        if unknown:
            bad("emit", f"unknown outputs {sorted(unknown)}; choose from {list(EMIT_CHOICES)}")
        if not isinstance(self.out, str) or not self.out:
            bad("out", "must be a non-empty path")
        if self.scenario not in _PRESETS and not _looks_like_file(self.scenario):
            try:
                compile_expression(self.scenario)
            except ValueError as exc:
                bad("scenario", f"not a preset, file or valid expression ({exc})")

    # -- presets ------------------------------------------------------------
    def resolved(self) -> "RunConfig":
        """Copy with preset defaults filled in and names canonicalised."""
        p = _PRESETS.get(self.scenario)
        g = p.guards if p else {}
        return replace(
            self,
            n=self.n if self.n is not None else (p.n if p else 256),
            t_end=float(self.t_end if self.t_end is not None else (p.t_end if p else 1.0)),
            form=EquationForm.parse(self.form if self.form is not None
                                    else (p.form if p else "u_quadrature")).value,
            kernel_mode=KernelMode.parse(self.kernel_mode).value,
            guard_amp=float(self.guard_amp if self.guard_amp is not None else g.get("amp", 1e3)),
            guard_grad=float(self.guard_grad if self.guard_grad is not None else g.get("grad", 1e4)),
            guard_tail=float(self.guard_tail if self.guard_tail is not None else g.get("tail", 0.1)),
            filter_level=float(self.filter_level if self.filter_level is not None
                               else (p.filter_level if p else 0.0)),
            tau=None if self.tau is None else float(self.tau),
            safety=float(self.safety),
            tau_max=float(self.tau_max),
        )

    # -- serialisation ------------------------------------------------------
    def to_dict(self) -> dict:
        d = asdict(self)
        d["emit"] = list(self.emit)
        return d

    def to_json(self) -> str:
        """Single-line JSON with sorted keys (embedded in output headers)."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict, text: Optional[str] = None, source: str = "config") -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("top level must be a JSON object", 1 if text else None, source)
        names = {f.name for f in fields(cls)}
        for key in d:
            if key not in names:
                raise ConfigError(f"unknown key; valid keys: {sorted(names)}",
                                  _line_of(text, key), source, key)
        kw = dict(d)
        if "emit" in kw:
            if not isinstance(kw["emit"], (list, tuple)):
                raise ConfigError("must be a list", _line_of(text, "emit"), source, "emit")
            kw["emit"] = tuple(kw["emit"])
        try:
            return cls(**kw)
        except ConfigError as exc:
            raise ConfigError(exc.message, _line_of(text, exc.key), source, exc.key) from None

    @classmethod
    def from_json(cls, text: str, source: str = "config") -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, exc.lineno, source) from None
        return cls.from_dict(d, text, source)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read(), source=path)


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    if not text or not key:
        return None
    pat = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for i, line in enumerate(text.splitlines(), 1):
        if pat.search(line):
            return i
    return None


def _looks_like_file(s: str) -> bool:
    import os

    return os.path.isfile(s)


HEADER_PREFIX = "# config: "


def header_line(cfg: RunConfig) -> str:
    return HEADER_PREFIX + cfg.to_json() + "\n"


def parse_header(line: str) -> RunConfig:
    if not line.startswith(HEADER_PREFIX):
        raise ConfigError("missing '# config:' header", 1)
    return RunConfig.from_json(line[len(HEADER_PREFIX):].strip(), source="header")
