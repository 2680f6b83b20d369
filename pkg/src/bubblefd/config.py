"""Flat ``key = value`` run configuration.

Lines starting with ``#`` are comments. Keys under ``result.`` and
``version.`` are written into manifests and ignored on load, so a manifest
can be fed back as a config.
"""

import ast
import math
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from .iteration import BubbleProblem, stationary_boundary, stationary_q_boundary
from .lcp import LCPOptions
from .obstacle import BoundaryData

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "apply_overrides", "dump_config",
           "compile_expression"]

IGNORED_PREFIXES = ("result.", "version.")
BOUNDARY_CHOICES = ("stationary", "stationary-q", "zero", "expression")


class ConfigError(ValueError):
    pass


# key in the file -> (field name, type)
_KEYS = {
    "sigma": ("sigma", float),
    "rho": ("rho", float),
    "r": ("r", float),
    "lambda": ("lam", float),
    "c": ("c", float),
    "a": ("a", float),
    "T": ("T", float),
    "M": ("M", int),
    "N": ("N", int),
    "lcp.method": ("lcp_method", str),
    "lcp.tol": ("lcp_tol", float),
    "lcp.omega": ("lcp_omega", float),
    "lcp.max_iter": ("lcp_max_iter", int),
    "outer_tol": ("outer_tol", float),
    "max_outer": ("max_outer", int),
    "iterations": ("iterations", int),
    "boundary": ("boundary", str),
    "g.initial": ("g_initial", str),
    "g.left": ("g_left", str),
    "g.right": ("g_right", str),
    "out": ("out", str),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in _KEYS.items()}


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run. Defaults are the reference example."""

    sigma: float = 1.0
    rho: float = 5.0
    r: float = 10.0
    lam: float = 1.0
    c: float = 0.001
    a: float = 2.0
    T: float = 3.0
    M: int = 50
    N: int = 50
    lcp_method: str = "psor"
    lcp_tol: float = 1e-10
    lcp_omega: float = 1.5
    lcp_max_iter: int = 10_000
    outer_tol: float = 1e-6
    max_outer: int = 50
    iterations: Optional[int] = None
    boundary: str = "stationary"
    g_initial: Optional[str] = None
    g_left: Optional[str] = None
    g_right: Optional[str] = None
    out: str = "out"

    def __post_init__(self):
        for name in ("sigma", "rho", "r", "a", "T", "lcp_tol", "outer_tol"):
            _require(name, getattr(self, name) > 0, "must be positive")
        for name in ("lam", "c"):
            _require(name, getattr(self, name) >= 0, "must be non-negative")
        for name in ("sigma", "rho", "r", "lam", "c", "a", "T", "lcp_tol", "lcp_omega", "outer_tol"):
            _require(name, math.isfinite(getattr(self, name)), "must be finite")
        _require("M", self.M >= 2, "must be >= 2")
        _require("N", self.N >= 1, "must be >= 1")
        _require("max_outer", self.max_outer >= 1, "must be >= 1")
        _require("lcp_max_iter", self.lcp_max_iter >= 1, "must be >= 1")
        _require("iterations", self.iterations is None or self.iterations >= 1, "must be >= 1")
        _require("boundary", self.boundary in BOUNDARY_CHOICES, f"must be one of {', '.join(BOUNDARY_CHOICES)}")
        if self.boundary == "expression":
            for name in ("g_initial", "g_left", "g_right"):
                _require(name, getattr(self, name) is not None, "is required when boundary = expression")
        try:
            self.lcp_options()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def lcp_options(self):
        return LCPOptions(self.lcp_method, self.lcp_tol, self.lcp_omega, self.lcp_max_iter)

    def problem(self):
        base = BubbleProblem(self.sigma, self.rho, self.r, self.lam, self.c, self.a, self.T)
        return replace(base, g=self.boundary_data(base))

    def boundary_data(self, problem):
        if self.boundary == "stationary":
            return stationary_boundary(problem)
        if self.boundary == "stationary-q":
            return stationary_q_boundary(problem)
        if self.boundary == "zero":
            return BoundaryData.zero()
        env = {"a": self.a, "T": self.T, "c": self.c, "sigma": self.sigma, "rho": self.rho,
               "r": self.r, "lam": self.lam}
        model = problem.stationary()
        env["q"] = model.q
        init = compile_expression(self.g_initial, ("x",), env)
        left = compile_expression(self.g_left, ("t",), env)
        right = compile_expression(self.g_right, ("t",), env)
        return BoundaryData(lambda x: init(x=np.asarray(x, dtype=float)), lambda t: left(t=t),
                            lambda t: right(t=t))

    @property
    def check_compat(self):
        # the literal q data cannot satisfy the non-local compatibility at small t
        return self.boundary != "stationary-q"


def _require(name, ok, what):
    if not ok:
        raise ConfigError(f"{_FIELD_TO_KEY.get(name, name)} {what}")


def _convert(key, typ, raw):
    raw = raw.strip()
    if typ is str:
        return raw
    if key == "iterations" and raw.lower() in ("", "none"):
        return None
    try:
        if typ is int:
            val = float(raw)
            if val != int(val):
                raise ValueError
            return int(val)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None


def parse_config(text, base=None):
    """Parse config text; unknown keys are an error."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key.startswith(IGNORED_PREFIXES):
            continue
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name, typ = _KEYS[key]
        values[name] = _convert(key, typ, raw)
    return replace(base or RunConfig(), **values)


def load_config(path, base=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base)


def apply_overrides(cfg, pairs):
    """Apply ``KEY=VALUE`` strings, as given to ``--set``."""
    text = "\n".join(p.replace("=", " = ", 1) if "=" in p else p for p in pairs)
    return parse_config(text, cfg)


def dump_config(cfg, extra=None):
    """Config text with floats written by ``repr`` (round-trips exactly)."""
    lines = []
    for f in fields(cfg):
        val = getattr(cfg, f.name)
        if val is None:
            if f.name == "iterations":
                lines.append("iterations = none")
            continue
        lines.append(f"{_FIELD_TO_KEY[f.name]} = {val!r}" if not isinstance(val, str)
                     else f"{_FIELD_TO_KEY[f.name]} = {val}")
    for key, val in (extra or {}).items():
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


# restricted arithmetic expressions for boundary data
_OPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Lt, ast.LtE, ast.Gt, ast.GtE)
_FUNCS = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs, "sin": np.sin,
          "cos": np.cos, "tanh": np.tanh, "expm1": np.expm1, "maximum": np.maximum,
          "minimum": np.minimum, "where": np.where}
_CONSTS = {"pi": math.pi, "e": math.e}


def compile_expression(source, variables, env=None):
    """Compile an arithmetic expression into a callable taking ``variables`` as keywords.

    Only numbers, the named variables, entries of ``env``, the usual operators
    and a fixed set of numpy functions are allowed.
    """
    env = dict(env or {})
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad expression {source!r}: {exc.msg}") from None
    allowed = set(variables) | set(env) | set(_FUNCS) | set(_CONSTS)

    def check(node):
        if isinstance(node, ast.Name):
            if node.id not in allowed:
                raise ConfigError(f"unknown name {node.id!r} in expression {source!r}")
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.keywords:
                raise ConfigError(f"unsupported call in expression {source!r}")
            for arg in node.args:
                check(arg)
            check(node.func)
            return
        elif isinstance(node, ast.Compare):
            ok = all(isinstance(op, (ast.Lt, ast.LtE, ast.Gt, ast.GtE)) for op in node.ops)
            if not ok:
                raise ConfigError(f"unsupported comparison in expression {source!r}")
        elif not isinstance(node, (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Load, *_OPS)):
            raise ConfigError(f"unsupported syntax {type(node).__name__} in expression {source!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"only numeric constants allowed in expression {source!r}")
        for child in ast.iter_child_nodes(node):
            check(child)

    check(tree)
    code = compile(tree, "<expression>", "eval")
    namespace = {"__builtins__": {}, **_FUNCS, **_CONSTS, **env}

    def fn(**kw):
        return eval(code, namespace, kw)

    return fn
