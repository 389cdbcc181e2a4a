"""Built-in bound-constrained biobjective problems.

Formulas follow the usual literature definitions (ZDT suite of Zitzler,
Deb and Thiele; MOP2 as Fonseca-Fleming; SK2; Kursawe) with the
dimensions and bounds used by the DMS test collection:

=========  ===  ==========================================  ======================
name       n    bounds                                       notes
=========  ===  ==========================================  ======================
ZDT1       30   [0, 1]^n                                     convex front
ZDT2       30   [0, 1]^n                                     concave front
ZDT3       30   [0, 1]^n                                     disconnected front
ZDT4       10   x1 in [0, 1], others in [-5, 5]              multimodal g
ZDT6       10   [0, 1]^n                                     g uses 0.25 power
MOP2        4   [-4, 4]^n                                    Fonseca-Fleming
SK2         4   [-10, 10]^n
Kursawe     3   [-5, 5]^n
=========  ===  ==========================================  ======================

``builtin_problem(name, n=...)`` overrides the dimension for desk-scale runs.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .problem import ConfigError, Problem


def _zdt_g(x: np.ndarray) -> float:
    return 1.0 + 9.0 * float(np.sum(x[1:])) / (x.shape[0] - 1)


def _zdt(kind: int, n: int) -> Problem:
    def f1(x):
        return float(x[0])

    if kind == 1:
        def f2(x):
            g = _zdt_g(x)
            return g * (1.0 - math.sqrt(x[0] / g))
    elif kind == 2:
        def f2(x):
            g = _zdt_g(x)
            return g * (1.0 - (x[0] / g) ** 2)
    else:
        def f2(x):
            g = _zdt_g(x)
            r = x[0] / g
            return g * (1.0 - math.sqrt(r) - r * math.sin(10.0 * math.pi * x[0]))

    return Problem(f"ZDT{kind}", np.zeros(n), np.ones(n), (f1, f2))


def _zdt4(n: int) -> Problem:
    def f1(x):
        return float(x[0])

    def f2(x):
        tail = x[1:]
        g = 1.0 + 10.0 * (n - 1) + float(np.sum(tail * tail - 10.0 * np.cos(4.0 * math.pi * tail)))
        return g * (1.0 - math.sqrt(x[0] / g))

    lower = np.full(n, -5.0)
    upper = np.full(n, 5.0)
    lower[0], upper[0] = 0.0, 1.0
    return Problem("ZDT4", lower, upper, (f1, f2))


def _zdt6(n: int) -> Problem:
    def f1(x):
        return 1.0 - math.exp(-4.0 * x[0]) * math.sin(6.0 * math.pi * x[0]) ** 6

    def f2(x):
        g = 1.0 + 9.0 * (float(np.sum(x[1:])) / (n - 1)) ** 0.25
        return g * (1.0 - (f1(x) / g) ** 2)

    return Problem("ZDT6", np.zeros(n), np.ones(n), (f1, f2))


def _mop2(n: int) -> Problem:
    shift = 1.0 / math.sqrt(n)

    def f1(x):
        return 1.0 - math.exp(-float(np.sum((x - shift) ** 2)))

    def f2(x):
        return 1.0 - math.exp(-float(np.sum((x + shift) ** 2)))

    return Problem("MOP2", np.full(n, -4.0), np.full(n, 4.0), (f1, f2))


def _sk2(n: int) -> Problem:
    if n != 4:
        raise ConfigError("SK2 is defined for n = 4 only")
    centre = np.array([2.0, -3.0, 5.0, 4.0])

    def f1(x):
        return float(np.sum((x - centre) ** 2)) - 5.0

    def f2(x):
        return -float(np.sum(np.sin(x))) / (1.0 + float(np.sum(x * x)) / 100.0)

    return Problem("SK2", np.full(n, -10.0), np.full(n, 10.0), (f1, f2))


def _kursawe(n: int) -> Problem:
    def f1(x):
        a, b = x[:-1], x[1:]
        return float(np.sum(-10.0 * np.exp(-0.2 * np.sqrt(a * a + b * b))))

    def f2(x):
        return float(np.sum(np.abs(x) ** 0.8 + 5.0 * np.sin(x**3)))

    return Problem("Kursawe", np.full(n, -5.0), np.full(n, 5.0), (f1, f2))


_CATALOG: dict[str, tuple[int, Callable[[int], Problem]]] = {
    "ZDT1": (30, lambda n: _zdt(1, n)),
    "ZDT2": (30, lambda n: _zdt(2, n)),
    "ZDT3": (30, lambda n: _zdt(3, n)),
    "ZDT4": (10, _zdt4),
    "ZDT6": (10, _zdt6),
    "MOP2": (4, _mop2),
    "SK2": (4, _sk2),
    "Kursawe": (3, _kursawe),
}


def available_problems() -> list[str]:
    return list(_CATALOG)


def default_dimension(name: str) -> int:
    return _CATALOG[_lookup(name)][0]


def _lookup(name: str) -> str:
    for key in _CATALOG:
        if key.lower() == name.lower():
            return key
    raise ConfigError(f"unknown problem {name!r}; available: {', '.join(_CATALOG)}")


def builtin_problem(name: str, n: int | None = None) -> Problem:
    key = _lookup(name)
    default_n, build = _CATALOG[key]
    n = default_n if n is None else int(n)
    if n < 2:
        raise ConfigError(f"{key}: dimension must be at least 2, got {n}")
    return build(n)
