"""Named initial data and a small expression language for custom data.

Expressions are evaluated on the node array ``x`` with a whitelist of numpy
functions; nothing else (attributes, names, calls) is reachable.

Discontinuous data are sampled nodally and the node sitting on a jump takes
the right limit.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "abs": np.abs, "tanh": np.tanh, "sinh": np.sinh,
    "cosh": np.cosh, "arctan": np.arctan, "sign": np.sign, "where": np.where,
    "minimum": np.minimum, "maximum": np.maximum,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power, ast.Mod: np.mod}
_CMPOPS = {ast.Lt: np.less, ast.LtE: np.less_equal, ast.Gt: np.greater,
           ast.GtE: np.greater_equal, ast.Eq: np.equal, ast.NotEq: np.not_equal}


class ExpressionError(ValueError):
    pass


def _eval(node, x):
    if isinstance(node, ast.Expression):
        return _eval(node.body, x)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id == "x":
            return x
        if node.id in _CONSTS:
            return _CONSTS[node.id]
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left, x), _eval(node.right, x))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, x)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Compare) and len(node.ops) == 1 and type(node.ops[0]) in _CMPOPS:
        return _CMPOPS[type(node.ops[0])](_eval(node.left, x), _eval(node.comparators[0], x))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
            and node.func.id in _FUNCS and not node.keywords:
        return _FUNCS[node.func.id](*(_eval(a, x) for a in node.args))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def compile_expression(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Turn ``text`` (a formula in ``x``) into a vectorised function."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    with np.errstate(all="ignore"):
        _eval(tree, np.zeros(1))  # reject bad syntax before any grid exists

    def f(x):
        with np.errstate(all="ignore"):
            out = np.broadcast_to(np.asarray(_eval(tree, x), dtype=float), np.shape(x))
        return np.array(out)

    return f


@dataclass(frozen=True)
class ScenarioPreset:
    """Named initial datum with the run parameters it is meant for.

    ``guards`` holds guard overrides (keys ``amp``, ``grad``, ``tail``).
    """

    name: str
    formula: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    n: int = 256
    t_end: float = 20.0
    form: str = "u_quadrature"
    guards: dict = field(default_factory=dict)
    filter_level: float = 0.0
    note: str = ""

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)


def _jump(x):
    return np.where(x < 0, 0.5, 1.0 - x / (2.0 * np.pi))


_CHIRP_R = 2.0 + 0.5 * math.sqrt(math.pi) * math.sin(1.0 / math.pi)
_CHIRP_G = (0.5 * math.pi - _CHIRP_R) / math.pi


def _chirp(x):
    x = np.asarray(x, dtype=float)
    right = np.full_like(x, 2.0)
    pos = x > 0
    right[pos] += 0.5 * np.sqrt(x[pos]) * np.sin(1.0 / x[pos])
    left = 0.5 + 0.5 * np.abs(x + 1.0) + _CHIRP_G * x
    return np.where(x < 0, left, right)


def _expr(name, formula, **kw):
    return ScenarioPreset(name, formula, compile_expression(formula), **kw)


_PRESETS = {p.name: p for p in [
    _expr("figA_smooth", "2 + sin(x) + 0.3*cos(5*x)", n=256, t_end=20.0,
          note="positive smooth data; relaxes to the constant 0.3*sqrt(101/2)"),
    ScenarioPreset("figA_jump", "1/2 on [-pi, 0), 1 - x/(2 pi) on [0, pi]", _jump,
                   n=256, t_end=20.0, note="positive data with a single jump, at 0"),
    ScenarioPreset("figA2_chirp",
                   "0.5 + 0.5|x+1| + g x on [-pi, 0), 2 + 0.5 sqrt(x) sin(1/x) on [0, pi]",
                   _chirp, n=512, t_end=2.0,
                   note="jump at 0 followed by a chirp; g makes the datum periodic"),
    _expr("figD_negative", "-2 - sin(x) - 0.3*cos(5*x)", n=256, t_end=1.0,
          filter_level=1e-13,
          note="negative data; develops a singularity in finite time (near t = 0.10)"),
    _expr("figB_unsigned", "1 + sin(x) + 0.1*cos(20*x)", n=512, t_end=5.0,
          note="sign-changing data with a high mode"),
    _expr("figC1_unsigned", "0.5 + sin(x) + 0.1*cos(7*x)", n=512, t_end=4.0,
          guards={"tail": 0.5},
          note="sign-changing data; a transient steepening is resolved, not a blow-up"),
    _expr("figC2_unsigned", "0.2 + 0.5*sin(19*x) + 0.5*cos(20*x)", n=512, t_end=2.0,
          note="sign-changing data dominated by high modes"),
    _expr("frozen_sine", "0.1*sin(x)", n=128, t_end=5.0, form="frozen",
          note="zero-mean data for the frozen model"),
]}


def preset_names() -> list:
    return sorted(_PRESETS)


def preset(name: str) -> ScenarioPreset:
    try:
        return _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}") from None


def initial_values(scenario: str, nodes: np.ndarray, base_dir: Optional[str] = None) -> np.ndarray:
    """Nodal initial data for a preset name, a file, or an inline expression.

    A file holds either an expression or exactly ``len(nodes)`` numbers
    (whitespace or comma separated).
    """
    import os

    if scenario in _PRESETS:
        vals = _PRESETS[scenario](nodes)
    else:
        path = scenario if base_dir is None else os.path.join(base_dir, scenario)
        if os.path.isfile(path):
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
            tokens = text.replace(",", " ").split()
            try:
                vals = np.array([float(t) for t in tokens])
            except ValueError:
                vals = compile_expression(text)(nodes)
            else:
                if vals.shape != nodes.shape:
                    raise ValueError(f"{path}: expected {nodes.size} values, found {vals.size}")
        else:
            vals = compile_expression(scenario)(nodes)
    vals = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"initial data {scenario!r} is not finite on the grid")
    return vals
