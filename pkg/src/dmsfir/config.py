"""Text problem configs with expression-tree objectives and constraints.

Format (UTF-8, one ``key = value`` per line, ``#`` starts a comment)::

    name = toy
    n = 3
    lower = 0            # single value is repeated n times
    upper = 1 1 2
    objective.1 = x[1]
    objective.2 = 1 - sqrt(x[1]) + sum(i, 2, n, x[i]^2)
    constraint.1 = x[1] + x[2] - 1.5
    family = 4           # optional, appends a built-in constraint family
    h_max = auto         # or a positive real
    start = 0.5          # optional feasible start for the barrier solver

Expressions use 1-based ``x[i]``, the constant ``n`` and ``pi``, the
operators ``+ - * / ^ **``, the functions ``sin cos tan exp log sqrt abs``
and ``sum(i, a, b, expr)`` for an inclusive index loop.
"""

from __future__ import annotations

import ast
import math
import re
from pathlib import Path
from typing import Callable

import numpy as np

from .problem import ConfigError, Problem, family_constraints, suggested_start

_FUNCS: dict[str, Callable[[float], float]] = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "log": math.log, "sqrt": math.sqrt, "abs": abs,
}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}


def compile_expression(text: str, n: int) -> Callable[[np.ndarray], float]:
    """Compile an expression string into a function of the length-n point.

    Evaluation errors (log of a negative number, division by zero, overflow)
    yield NaN, which the evaluator turns into a rejected point.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from None
    node = _build(tree.body, text)

    def fn(x: np.ndarray) -> float:
        try:
            value = node(x, {"n": n})
            return float(value) if not isinstance(value, complex) else math.nan
        except (ValueError, ZeroDivisionError, OverflowError, IndexError):
            return math.nan

    # surface bad indices / names at load time rather than mid-run
    probe = np.zeros(n)
    try:
        node(probe, {"n": n})
    except IndexError:
        raise ConfigError(f"expression {text!r} indexes outside x[1..{n}]") from None
    except ConfigError:
        raise
    except (ValueError, ZeroDivisionError, OverflowError):
        pass
    return fn


def _build(node: ast.AST, src: str):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        v = float(node.value)
        return lambda x, env: v
    if isinstance(node, ast.Name):
        name = node.id
        if name == "pi":
            return lambda x, env: math.pi
        return lambda x, env: _lookup_name(env, name, src)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _build(node.operand, src)
        sign = -1.0 if isinstance(node.op, ast.USub) else 1.0
        return lambda x, env: sign * inner(x, env)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _build(node.left, src), _build(node.right, src)
        return lambda x, env: op(left(x, env), right(x, env))
    if isinstance(node, ast.Subscript) and isinstance(node.value, ast.Name) and node.value.id == "x":
        index = _build(node.slice, src)

        def subscript(x, env):
            i = index(x, env)
            k = int(round(i))
            if k != i or k < 1 or k > x.shape[0]:
                raise IndexError(k)
            return float(x[k - 1])
        return subscript
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        fname = node.func.id
        if fname == "sum":
            return _build_sum(node, src)
        if fname in _FUNCS and len(node.args) == 1:
            f = _FUNCS[fname]
            arg = _build(node.args[0], src)
            return lambda x, env: f(arg(x, env))
    raise ConfigError(f"unsupported construct {ast.dump(node)[:60]} in expression {src!r}")


def _build_sum(node: ast.Call, src: str):
    if len(node.args) != 4 or not isinstance(node.args[0], ast.Name):
        raise ConfigError(f"sum expects sum(i, start, stop, expr) in {src!r}")
    var = node.args[0].id
    if var in ("x", "n", "pi"):
        raise ConfigError(f"reserved loop variable {var!r} in {src!r}")
    lo, hi, body = (_build(a, src) for a in node.args[1:])

    def total(x, env):
        a, b = int(round(lo(x, env))), int(round(hi(x, env)))
        acc = 0.0
        inner = dict(env)
        for i in range(a, b + 1):
            inner[var] = float(i)
            acc += body(x, inner)
        return acc
    return total


def _lookup_name(env: dict, name: str, src: str) -> float:
    if name not in env:
        raise ConfigError(f"unknown name {name!r} in expression {src!r}")
    return env[name]


def _vector(text: str, n: int, key: str) -> np.ndarray:
    try:
        values = [float(tok) for tok in text.split()]
    except ValueError:
        raise ConfigError(f"{key}: expected real numbers, got {text!r}") from None
    if len(values) == 1:
        return np.full(n, values[0])
    if len(values) != n:
        raise ConfigError(f"{key}: expected 1 or {n} values, got {len(values)}")
    return np.array(values)


_INDEXED = re.compile(r"^(objective|constraint)\.(\d+)$")


def parse_problem_config(text: str, source: str = "<config>") -> Problem:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = value

    for req in ("n", "lower", "upper"):
        if req not in entries:
            raise ConfigError(f"{source}: missing required key {req!r}")
    try:
        n = int(entries.pop("n"))
    except ValueError:
        raise ConfigError(f"{source}: n must be an integer") from None
    if n < 1:
        raise ConfigError(f"{source}: n must be positive")
    name = entries.pop("name", Path(source).stem)
    lower = _vector(entries.pop("lower"), n, "lower")
    upper = _vector(entries.pop("upper"), n, "upper")

    objectives: dict[int, Callable] = {}
    constraints: dict[int, Callable] = {}
    family = 0
    h_max: float | str = "auto"
    start = None
    for key, value in entries.items():
        match = _INDEXED.match(key)
        if match:
            target = objectives if match.group(1) == "objective" else constraints
            target[int(match.group(2))] = compile_expression(value, n)
        elif key == "family":
            family = int(value)
        elif key == "h_max":
            if value != "auto":
                try:
                    h_max = float(value)
                except ValueError:
                    raise ConfigError(f"{source}: h_max must be 'auto' or a real") from None
        elif key == "start":
            start = _vector(value, n, "start")
        else:
            raise ConfigError(f"{source}: unknown key {key!r}")

    cons = [constraints[k] for k in sorted(constraints)]
    if family:
        cons += family_constraints(family, n)
        if start is None:
            start = suggested_start(family, n)
    return Problem(
        name=name,
        lower=lower,
        upper=upper,
        objectives=tuple(objectives[k] for k in sorted(objectives)),
        constraints=tuple(cons),
        h_max=h_max,
        family=family,
        start=start,
    )


def load_problem_config(path: str | Path) -> Problem:
    path = Path(path)
    return parse_problem_config(path.read_text(encoding="utf-8"), str(path))
