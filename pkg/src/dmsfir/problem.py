"""Problem definitions, constraint violation, and point evaluation.

A :class:`Problem` bundles bounds (the unrelaxable set X), objective
components and relaxable constraints. :func:`evaluate` maps a point to the
extended objective vector ``(f_1, ..., f_m, h)`` with extreme-barrier
semantics for X and the ``h <= h_max`` threshold.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence, Union

import numpy as np

log = logging.getLogger(__name__)

ScalarFn = Callable[[np.ndarray], float]


class ConfigError(ValueError):
    """Invalid problem or run configuration."""


class Norm(enum.Enum):
    L1 = "L1"
    L2 = "L2"
    LINF = "Linf"


@dataclass(frozen=True)
class ViolationConfig:
    norm: Norm = Norm.L2
    exponent: float = 2.0

    def __post_init__(self):
        if not self.exponent > 0:
            raise ConfigError(f"violation exponent must be positive, got {self.exponent}")


class Status(enum.Enum):
    OK = "Ok"
    BARRIER_X = "BarrierX"
    ABOVE_HMAX = "AboveHmax"


@dataclass(frozen=True)
class Evaluation:
    f: np.ndarray
    h: float
    status: Status

    @property
    def ok(self) -> bool:
        return self.status is Status.OK

    def extended(self) -> np.ndarray:
        """The extended vector ``(f_1, ..., f_m, h)``; all +inf under the barrier."""
        cached = self.__dict__.get("_fbar")
        if cached is None:
            if self.status is Status.BARRIER_X:
                cached = np.full(self.f.shape[0] + 1, np.inf)
            else:
                cached = np.append(self.f, self.h)
            cached.flags.writeable = False
            object.__setattr__(self, "_fbar", cached)
        return cached


@dataclass
class EvalCounter:
    """Per-run evaluation accounting.

    ``f_evals`` counts points where at least one objective component was
    computed (the budgeted quantity). ``h_evals`` counts constraint-only
    evaluations (restoration inner loop, points rejected above h_max).
    """

    f_evals: int = 0
    h_evals: int = 0
    nan_rejections: int = 0


HMax = Union[float, str]


@dataclass(frozen=True)
class Problem:
    name: str
    lower: np.ndarray
    upper: np.ndarray
    objectives: tuple[ScalarFn, ...]
    constraints: tuple[ScalarFn, ...] = ()
    violation_cfg: ViolationConfig = field(default_factory=ViolationConfig)
    h_max: HMax = "auto"
    # family tag and start are kept so callers can rebuild suggested starts
    family: int = 0
    start: np.ndarray | None = None

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "objectives", tuple(self.objectives))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if lower.ndim != 1 or lower.shape != upper.shape or lower.size == 0:
            raise ConfigError(f"{self.name}: bounds must be equal-length nonempty vectors")
        if np.any(lower > upper):
            raise ConfigError(f"{self.name}: lower bound exceeds upper bound")
        if len(self.objectives) < 2:
            raise ConfigError(f"{self.name}: at least two objectives are required")
        if not (self.h_max == "auto" or (isinstance(self.h_max, (int, float)) and self.h_max > 0)):
            raise ConfigError(f"{self.name}: h_max must be 'auto' or a positive real")
        if self.start is not None:
            object.__setattr__(self, "start", np.asarray(self.start, dtype=float))

    @property
    def n(self) -> int:
        return int(self.lower.shape[0])

    @property
    def m(self) -> int:
        return len(self.objectives)

    @property
    def p(self) -> int:
        return len(self.constraints)

    def in_bounds(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def constraint_values(self, x: np.ndarray) -> np.ndarray:
        return np.array([c(x) for c in self.constraints], dtype=float)

    def with_h_max(self, h_max: HMax) -> "Problem":
        return replace(self, h_max=h_max)


def violation(constraint_values: Sequence[float], cfg: ViolationConfig = ViolationConfig()) -> float:
    """Aggregated violation ``||max(C, 0)||^r`` under the configured norm."""
    c = np.asarray(constraint_values, dtype=float)
    if c.size == 0:
        return 0.0
    if np.any(np.isnan(c)):
        return math.inf
    plus = np.maximum(c, 0.0)
    if not np.any(plus > 0):
        return 0.0
    if np.any(np.isinf(plus)):
        return math.inf
    r = cfg.exponent
    if cfg.norm is Norm.L1:
        base = float(np.sum(plus))
    elif cfg.norm is Norm.LINF:
        base = float(np.max(plus))
    else:
        # squared-L2 hinge is the common case; keep it free of sqrt round-off
        sq = float(np.sum(plus * plus))
        return sq if r == 2 else sq ** (r / 2)
    return base if r == 1 else base**r


def constraint_violation(problem: Problem, x: np.ndarray, counter: EvalCounter | None = None) -> float:
    """h(x) alone; counted as a constraint-only evaluation."""
    if counter is not None:
        counter.h_evals += 1
    if problem.p == 0:
        return 0.0
    try:
        values = problem.constraint_values(x)
    except (ValueError, ZeroDivisionError, OverflowError):
        return math.inf
    return violation(values, problem.violation_cfg)


def resolved_h_max(problem: Problem) -> float:
    return math.inf if problem.h_max == "auto" else float(problem.h_max)


def evaluate(
    problem: Problem,
    x: np.ndarray,
    counter: EvalCounter | None = None,
    *,
    h_max: float | None = None,
    feasible_only_tol: float | None = None,
    full: bool = False,
) -> Evaluation:
    """Evaluate ``x`` with the extreme barrier on X and the h_max threshold.

    Constraints are computed before objectives, so barrier and
    above-threshold points never trigger objective calls unless ``full`` is
    set. ``feasible_only_tol`` turns every point with ``h >= tol`` into a
    barrier point (extreme-barrier baseline).
    """
    x = np.asarray(x, dtype=float)
    m = problem.m
    if x.shape != (problem.n,):
        raise ValueError(f"expected a point of length {problem.n}, got shape {x.shape}")
    if h_max is None:
        h_max = resolved_h_max(problem)
    if not problem.in_bounds(x):
        return Evaluation(np.full(m, np.inf), math.inf, Status.BARRIER_X)

    h = 0.0
    if problem.p:
        try:
            h = violation(problem.constraint_values(x), problem.violation_cfg)
        except (ValueError, ZeroDivisionError, OverflowError):
            h = math.inf
    if feasible_only_tol is not None and not h < feasible_only_tol:
        if counter is not None:
            counter.h_evals += 1
        return Evaluation(np.full(m, np.inf), math.inf, Status.BARRIER_X)

    above = h > h_max or math.isinf(h)
    if above and not full:
        if counter is not None:
            counter.h_evals += 1
        return Evaluation(np.full(m, np.inf), h, Status.ABOVE_HMAX)

    if counter is not None:
        counter.f_evals += 1
    try:
        f = np.array([fn(x) for fn in problem.objectives], dtype=float)
    except (ValueError, ZeroDivisionError, OverflowError):
        f = np.full(m, np.nan)
    if not np.all(np.isfinite(f)):
        log.warning("%s: non-finite objective value at x=%s; point rejected", problem.name, x.tolist())
        if counter is not None:
            counter.nan_rejections += 1
        return Evaluation(np.full(m, np.inf), math.inf, Status.BARRIER_X)
    status = Status.ABOVE_HMAX if above else Status.OK
    return Evaluation(f, h, status)


# -- constraint families ------------------------------------------------------

_FAMILY_COUNT = {1: lambda n: n - 2, 2: lambda n: n - 2, 3: lambda n: n - 1,
                 4: lambda n: n - 1, 5: lambda n: n - 2, 6: lambda n: 1}
_FAMILY_START = {1: 1.0, 2: 2.0, 3: 0.5, 4: 0.0, 5: 2.0, 6: 2.0}
_FAMILY_MIN_N = {1: 3, 2: 3, 3: 2, 4: 2, 5: 3, 6: 3}


def _chain(j: int, shift: float, curv: float) -> ScalarFn:
    # (3 - curv*x_{j+1}) x_{j+1} - x_j - 2 x_{j+2} + shift, 0-based j
    def g(x: np.ndarray) -> float:
        return float((3.0 - curv * x[j + 1]) * x[j + 1] - x[j] - 2.0 * x[j + 2] + shift)
    return g


def _quad(j: int, linear: bool) -> ScalarFn:
    def g(x: np.ndarray) -> float:
        a, b = x[j], x[j + 1]
        q = a * a + b * b + a * b
        return float(q - 2.0 * a - 2.0 * b + 1.0) if linear else float(q - 1.0)
    return g


def _chain_sum(x: np.ndarray) -> float:
    mid = x[1:-1]
    return float(np.sum((3.0 - 0.5 * mid) * mid - x[:-2] - 2.0 * x[2:] + 1.0))


def family_constraints(family: int, n: int) -> list[ScalarFn]:
    if family not in _FAMILY_COUNT:
        raise ConfigError(f"constraint family must be in 1..6, got {family}")
    if n < _FAMILY_MIN_N[family]:
        raise ConfigError(f"constraint family {family} needs n >= {_FAMILY_MIN_N[family]}, got n = {n}")
    p = _FAMILY_COUNT[family](n)
    if family == 1:
        return [_chain(j, 1.0, 2.0) for j in range(p)]
    if family == 2:
        return [_chain(j, 2.5, 2.0) for j in range(p)]
    if family == 3:
        return [_quad(j, True) for j in range(p)]
    if family == 4:
        return [_quad(j, False) for j in range(p)]
    if family == 5:
        return [_chain(j, 1.0, 0.5) for j in range(p)]
    return [_chain_sum]


def apply_constraint_family(base: Problem, family: int) -> Problem:
    """Append the ``family`` constraints to a bound-constrained problem."""
    if base.p != 0:
        raise ConfigError(f"{base.name} already has {base.p} relaxable constraints")
    cons = family_constraints(family, base.n)
    return replace(base, name=f"{base.name}-g{family}", constraints=tuple(cons),
                   family=family, start=suggested_start(family, base.n))


def suggested_start(family: int, n: int) -> np.ndarray:
    if family not in _FAMILY_START:
        raise ConfigError(f"constraint family must be in 1..6, got {family}")
    return np.full(n, _FAMILY_START[family])
