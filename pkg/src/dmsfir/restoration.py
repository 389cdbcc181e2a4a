"""Inexact feasibility restoration.

Approximately solves

    min_{y in X} 0.5 * ||y - x_k||^2   s.t.  h(y) <= xi(alpha_k) * h(x_k)

with a derivative-free quadratic penalty: successive rounds minimize
``0.5 * ||y - x_k||^2 + mu * max(0, h(y) / target - 1)^2`` by a coordinate
direct search, growing ``mu`` between rounds. The inner search expands the
step along successful directions and, after a failed coordinate poll,
tries the pull toward ``x_k`` projected off a simplex gradient of h built
from that poll. Only ``h`` is evaluated here; objectives are computed by
the caller for the returned point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problem import EvalCounter, Problem, constraint_violation


@dataclass(frozen=True)
class RestorationConfig:
    xi_divisor: float = 2.0
    xi_power: float = 2.0
    inner_budget: int | None = None  # None -> 200 * n
    penalty_start: float = 1.0
    penalty_growth: float = 10.0
    max_penalty_rounds: int = 8
    tol: float = 0.0
    min_step_factor: float = 2.0**-10

    def budget(self, n: int) -> int:
        return 200 * n if self.inner_budget is None else int(self.inner_budget)


def xi(alpha: float, cfg: RestorationConfig = RestorationConfig()) -> float:
    """Contraction factor for the violation target; ``(alpha / 2) ** 2`` by default."""
    return (alpha / cfg.xi_divisor) ** cfg.xi_power


@dataclass
class RestorationOutcome:
    y_star: np.ndarray
    achieved_h: float
    target_h: float
    satisfied: bool
    inner_evals: int
    # (merit at round start, merit at round end) per penalty round
    rounds: list[tuple[float, float]] = field(default_factory=list)


def _round_to_mesh(y: np.ndarray, x_k: np.ndarray, spacing: float,
                   lower: np.ndarray, upper: np.ndarray, away: bool = False) -> np.ndarray:
    """Snap ``y`` onto ``x_k + spacing * Z^n``.

    Nearest rounding by default; ``away`` rounds each coordinate away from
    ``x_k`` instead. Coordinates that would leave the bounds are truncated
    toward ``x_k``.
    """
    u = (y - x_k) / spacing
    steps = np.sign(u) * np.ceil(np.abs(u) - 1e-9) if away else np.round(u)
    z = x_k + spacing * steps
    outside = (z < lower) | (z > upper)
    if np.any(outside):
        toward = np.trunc(u)
        z[outside] = x_k[outside] + spacing * toward[outside]
    return z


def _tangent_direction(y, x_k, step, lower, upper, cache) -> np.ndarray | None:
    """Pull toward ``x_k`` projected off an estimated gradient of h.

    The gradient comes from the h values cached at ``y +- step * e_i``
    (coordinate poll just performed), so no extra evaluations are spent.
    """
    n = y.shape[0]
    g = np.zeros(n)
    hy = cache.get(y.tobytes())
    if hy is None:
        return None
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        up = cache.get(np.clip(y + e, lower, upper).tobytes())
        dn = cache.get(np.clip(y - e, lower, upper).tobytes())
        if up is not None and dn is not None:
            g[i] = (up - dn) / (2 * step)
        elif up is not None:
            g[i] = (up - hy) / step
        elif dn is not None:
            g[i] = (hy - dn) / step
    pull = x_k - y
    gg = float(g @ g)
    if gg > 0:
        pull = pull - (pull @ g) / gg * g
    norm = float(np.linalg.norm(pull))
    if norm == 0 or not np.isfinite(norm):
        return None
    return pull / norm


def restore(
    problem: Problem,
    x_k: np.ndarray,
    alpha_k: float,
    cfg: RestorationConfig = RestorationConfig(),
    *,
    h_xk: float | None = None,
    counter: EvalCounter | None = None,
    mesh: float | None = None,
) -> RestorationOutcome:
    """Restoration from ``x_k``; ``mesh`` snaps the result onto ``x_k + mesh * Z^n``."""
    x_k = np.asarray(x_k, dtype=float)
    n = problem.n
    h0 = constraint_violation(problem, x_k) if h_xk is None else float(h_xk)
    if not h0 > 0:
        raise ValueError("restoration requires h(x_k) > 0")
    target = xi(alpha_k, cfg) * h0
    lower, upper = problem.lower, problem.upper
    budget = cfg.budget(n)
    cache: dict[bytes, float] = {x_k.tobytes(): h0}
    used = 0

    def h_of(y: np.ndarray) -> float | None:
        nonlocal used
        key = y.tobytes()
        if key in cache:
            return cache[key]
        if used >= budget:
            return None
        used += 1
        value = constraint_violation(problem, y, counter)
        cache[key] = value
        return value

    best_feas: np.ndarray | None = None
    best_feas_d = math.inf

    def note(y: np.ndarray, hy: float) -> None:
        nonlocal best_feas, best_feas_d
        if hy <= target + cfg.tol:
            d = 0.5 * float(np.sum((y - x_k) ** 2))
            if d < best_feas_d:
                best_feas, best_feas_d = y.copy(), d

    def merit(y: np.ndarray, hy: float, mu: float) -> float:
        viol = max(0.0, hy / target - 1.0)
        return 0.5 * float(np.sum((y - x_k) ** 2)) + mu * viol * viol

    eye = np.eye(n)
    dirs = np.vstack([eye, -eye])
    y, hy = x_k.copy(), h0
    mu = cfg.penalty_start
    rounds: list[tuple[float, float]] = []
    min_step = alpha_k * cfg.min_step_factor
    exhausted = False

    def trial(z: np.ndarray) -> tuple[np.ndarray, float, float] | None:
        nonlocal exhausted
        z = np.clip(z, lower, upper)
        hz = h_of(z)
        if hz is None:
            exhausted = True
            return None
        note(z, hz)
        return z, hz, merit(z, hz, mu)

    def expand(y, hy, m_cur, d, step):
        # keep doubling along a successful direction while merit decreases
        while not exhausted:
            step *= 2.0
            t = trial(y + step * d)
            if t is None or t[2] >= m_cur or np.array_equal(t[0], y):
                break
            y, hy, m_cur = t
        return y, hy, m_cur

    for _ in range(cfg.max_penalty_rounds):
        m_cur = merit(y, hy, mu)
        m_start = m_cur
        step = alpha_k
        order = list(range(len(dirs)))
        while step >= min_step and not exhausted:
            moved = False
            for pos, i in enumerate(order):
                if np.array_equal(np.clip(y + step * dirs[i], lower, upper), y):
                    continue
                t = trial(y + step * dirs[i])
                if t is None:
                    break
                if t[2] < m_cur:
                    y, hy, m_cur = expand(*t, dirs[i], step)
                    order.insert(0, order.pop(pos))
                    moved = True
                    break
            if not moved and not exhausted:
                d = _tangent_direction(y, x_k, step, lower, upper, cache)
                if d is not None:
                    t = trial(y + step * d)
                    if t is not None and t[2] < m_cur:
                        y, hy, m_cur = expand(*t, d, step)
                        moved = True
            if not moved:
                step *= 0.5
        rounds.append((m_start, m_cur))
        if exhausted or hy <= target + cfg.tol:
            break
        mu *= cfg.penalty_growth

    if best_feas is not None:
        y_star, h_star = best_feas, cache[best_feas.tobytes()]
    else:
        y_star, h_star = y, hy
    if mesh is not None:
        for away in (False, True):
            z = _round_to_mesh(y_star, x_k, mesh, lower, upper, away)
            hz = cache.get(z.tobytes())
            if hz is None:
                used += 1
                hz = constraint_violation(problem, z, counter)
                cache[z.tobytes()] = hz
            if hz <= target + cfg.tol or away:
                break
        y_star, h_star = z, hz
    satisfied = h_star <= target + cfg.tol
    return RestorationOutcome(y_star, float(h_star), target, bool(satisfied), used, rounds)
