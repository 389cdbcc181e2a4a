"""DMS-FILTER-IR main loop and the extreme-barrier DMS baseline.

Each iteration selects one centre from the nondominated list, tries an
inexact restoration step when the centre violates the relaxable
constraints, otherwise (or if restoration does not change the list) polls
around it, and then updates step sizes. The barrier baseline is the same
loop with restoration disabled and every infeasible point rejected.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .archive import (
    Archive,
    ArchiveEntry,
    ForcingFunction,
    ForcingMode,
    apply_step_update,
    merge_candidates,
)
from .directions import DirectionGenerator, DirectionKind, PositiveSpanningSet, StepRule, step_update
from .problem import ConfigError, EvalCounter, Problem, Status, evaluate
from .restoration import RestorationConfig, restore

log = logging.getLogger(__name__)


class InitializationError(RuntimeError):
    """No usable initial point (barrier violation, above h_max, or infeasible for EB)."""


class Mode(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


class StopReason(enum.Enum):
    BUDGET = "Budget"
    MIN_ALPHA = "MinAlpha"
    MAX_ITERS = "MaxIters"


@dataclass
class RunConfig:
    alpha0: float = 1.0
    step_rule: StepRule = field(default_factory=StepRule)
    directions: DirectionKind = DirectionKind.COORDINATE
    forcing: ForcingFunction | None = None  # None -> zero (coordinate) / power (halton)
    max_evals: int = 5000
    min_alpha: float = 1e-3
    feas_tol: float = 1e-5
    eta_ball: float | None = None  # None -> 1 / beta2
    seed: int = 0
    initial_points: np.ndarray | None = None
    h_max: float | str | None = None  # None -> the problem's own setting
    restoration: RestorationConfig = field(default_factory=RestorationConfig)
    max_iters: int | None = None

    def resolved_forcing(self) -> ForcingFunction:
        if self.forcing is not None:
            return self.forcing
        if self.directions is DirectionKind.HALTON:
            return ForcingFunction(ForcingMode.POWER, 1e-4, 1.0)
        return ForcingFunction(ForcingMode.ZERO)

    def resolved_eta(self) -> float:
        return 1.0 / self.step_rule.beta2 if self.eta_ball is None else self.eta_ball

    def validate(self) -> None:
        if not self.alpha0 > 0:
            raise ConfigError("alpha0 must be positive")
        if not self.min_alpha > 0:
            raise ConfigError("min_alpha must be positive")
        if self.max_evals < 1:
            raise ConfigError("max_evals must be at least 1")
        if self.resolved_eta() < 1.0 / self.step_rule.beta2 - 1e-12:
            raise ConfigError("eta_ball must be at least 1 / beta2")
        if self.directions is DirectionKind.HALTON and self.resolved_forcing().mode is ForcingMode.ZERO:
            raise ConfigError("dense (halton) directions need power forcing; the lattice argument does not apply")


@dataclass
class ModeState:
    mode: Mode = Mode.FEASIBLE
    last_feasible_center: np.ndarray | None = None
    last_poll_dirs_maxnorm: float = 1.0
    last_center_alpha: float = 1.0


@dataclass
class IterationRecord:
    iter: int
    mode: Mode
    center: np.ndarray
    center_h: float
    step: str
    success: bool
    alpha: float
    alpha_new: float
    evals: int
    archive_size: int
    n_feasible: int
    restoration_tried: bool = False
    restoration_satisfied: bool = False
    poll_evaluated: int = 0
    poll_feasible: int = 0

    CSV_HEADER = "iter,mode,step,success,alpha,evals,archive_size,n_feasible"

    def csv_row(self) -> str:
        return (f"{self.iter},{self.mode.value},{self.step},{int(self.success)},"
                f"{self.alpha!r},{self.evals},{self.archive_size},{self.n_feasible}")


@dataclass
class RunResult:
    solver: str
    archive: Archive
    feasible_front: list[ArchiveEntry]
    evals: int
    h_evals: int
    restoration_h_evals: int
    log: list[IterationRecord]
    stop_reason: StopReason
    h_max: float

    def log_lines(self) -> list[str]:
        return [IterationRecord.CSV_HEADER] + [r.csv_row() for r in self.log]


IterationHook = Callable[[IterationRecord, Archive], None]


@dataclass
class PollStats:
    n_evaluated: int = 0  # h computed (status Ok or AboveHmax)
    n_ok: int = 0
    n_feasible: int = 0
    n_rejected: int = 0
    truncated: bool = False


def most_isolated(values: np.ndarray) -> int:
    """Index of the most isolated point of an (N, m) array of objective values.

    Per component, points are sorted by value; the end points get the gap to
    their neighbour and interior points half the gap between their two
    neighbours. The per-component gaps are averaged and the largest average
    wins, lowest index on ties.
    """
    values = np.asarray(values, dtype=float)
    count, m = values.shape
    if count == 1:
        return 0
    score = np.zeros(count)
    for i in range(m):
        order = np.argsort(values[:, i], kind="stable")
        sv = values[order, i]
        delta = np.empty(count)
        delta[0] = sv[1] - sv[0]
        delta[-1] = sv[-1] - sv[-2]
        if count > 2:
            delta[1:-1] = (sv[2:] - sv[:-2]) / 2.0
        score[order] += delta
    score /= m
    return int(np.argmax(score))


def select_iterate(archive: Archive, state: ModeState, cfg: RunConfig) -> ArchiveEntry:
    """Pick the poll centre according to the current feasible/infeasible mode.

    Entries whose step size already fell below ``cfg.min_alpha`` are only
    considered when nothing else is left.
    """
    entries = list(archive)
    if not entries:
        raise RuntimeError("cannot select an iterate from an empty archive")
    tol = cfg.feas_tol
    eligible = [e for e in entries if e.alpha >= cfg.min_alpha] or entries
    feas = [e for e in eligible if e.h < tol]
    infeas = [e for e in eligible if e.h >= tol]

    if feas and (state.mode is Mode.FEASIBLE or not infeas):
        return feas[most_isolated(np.array([e.eval.f for e in feas]))]

    def least_violated(pool):
        return min(pool, key=lambda e: (e.h, e.serial))

    if not any(e.h < tol for e in entries) or state.last_feasible_center is None:
        return least_violated(infeas)
    radius = cfg.resolved_eta() * state.last_center_alpha * state.last_poll_dirs_maxnorm
    centre = state.last_feasible_center
    in_ball = [e for e in infeas if float(np.linalg.norm(e.x - centre)) <= radius]
    return least_violated(in_ball or infeas)


def poll(
    problem: Problem,
    center: ArchiveEntry,
    pss: PositiveSpanningSet,
    budget_left: int,
    counter: EvalCounter,
    *,
    h_max: float,
    feas_tol: float,
    feasible_only: bool = False,
) -> tuple[list[ArchiveEntry], PollStats]:
    """Complete poll in direction order, truncated once the budget is spent."""
    stats = PollStats()
    out: list[ArchiveEntry] = []
    start = counter.f_evals
    alpha = center.alpha
    barrier_tol = feas_tol if feasible_only else None
    for d in pss.dirs:
        if counter.f_evals - start >= budget_left:
            stats.truncated = True
            break
        x = center.x + alpha * d
        ev = evaluate(problem, x, counter, h_max=h_max, feasible_only_tol=barrier_tol)
        if ev.status is Status.BARRIER_X:
            stats.n_rejected += 1
            continue
        stats.n_evaluated += 1
        if ev.h < feas_tol:
            stats.n_feasible += 1
        if ev.status is Status.OK:
            stats.n_ok += 1
            out.append(ArchiveEntry(x, alpha, ev))
        else:
            stats.n_rejected += 1
    return out, stats


def segment_initialization(problem: Problem) -> np.ndarray:
    """``n`` points equally spaced on the segment from the lower to the upper bounds."""
    if not (np.all(np.isfinite(problem.lower)) and np.all(np.isfinite(problem.upper))):
        raise ConfigError(f"{problem.name}: segment initialization needs finite bounds; supply initial points")
    n = problem.n
    t = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    return problem.lower[None, :] + t[:, None] * (problem.upper - problem.lower)[None, :]


def _initial_points(problem: Problem, cfg: RunConfig, barrier: bool) -> np.ndarray:
    if cfg.initial_points is not None:
        pts = np.atleast_2d(np.asarray(cfg.initial_points, dtype=float))
    elif barrier and problem.start is not None:
        pts = problem.start[None, :]
    else:
        pts = segment_initialization(problem)
    if pts.shape[1] != problem.n:
        raise ConfigError(f"initial points must have {problem.n} columns")
    return pts


def _run(problem: Problem, cfg: RunConfig, barrier: bool,
         on_iteration: IterationHook | None = None) -> RunResult:
    cfg.validate()
    forcing = cfg.resolved_forcing()
    rule = cfg.step_rule
    tol = cfg.feas_tol
    counter = EvalCounter()
    restoration_h = 0
    h_setting = problem.h_max if cfg.h_max is None else cfg.h_max
    if not (h_setting == "auto" or (isinstance(h_setting, (int, float)) and h_setting > 0)):
        raise ConfigError("h_max must be 'auto' or a positive real")
    h_max = math.inf if h_setting == "auto" else float(h_setting)

    archive = Archive()
    barrier_tol = tol if barrier else None
    for x in _initial_points(problem, cfg, barrier):
        if counter.f_evals >= cfg.max_evals:
            break
        ev = evaluate(problem, x, counter, h_max=h_max, feasible_only_tol=barrier_tol)
        if ev.ok:
            merge_candidates(archive, [ArchiveEntry(x.copy(), cfg.alpha0, ev)], cfg.alpha0,
                             ForcingFunction(ForcingMode.ZERO))
    if not len(archive):
        if barrier:
            raise InitializationError(
                f"{problem.name}: the barrier solver needs a feasible initial point inside the bounds")
        raise InitializationError(
            f"{problem.name}: no initial point lies in the bounds with h <= h_max; try overriding h_max")
    if h_setting == "auto":
        hs = [e.h for e in archive]
        h_max = max(hs) if max(hs) >= tol else max(10.0, problem.p / 2.0)

    # plain dominance relies on every point lying on a fixed lattice, so
    # restoration output is snapped to the finest poll scale in use
    mesh = None
    if forcing.mode is ForcingMode.ZERO:
        tau = rule.tau
        mesh = cfg.alpha0 * tau ** -math.ceil(math.log(cfg.alpha0 / cfg.min_alpha, tau) - 1e-12)

    gen = DirectionGenerator(cfg.directions, problem.n, start_index=1 + cfg.seed)
    state = ModeState()
    records: list[IterationRecord] = []
    stop = StopReason.BUDGET
    k = 0
    while True:
        if counter.f_evals >= cfg.max_evals:
            stop = StopReason.BUDGET
            break
        if all(e.alpha < cfg.min_alpha for e in archive):
            stop = StopReason.MIN_ALPHA
            break
        if cfg.max_iters is not None and k >= cfg.max_iters:
            stop = StopReason.MAX_ITERS
            break

        mode_used = state.mode
        center = select_iterate(archive, state, cfg)
        alpha = center.alpha
        center_feasible = center.h < tol
        success = False
        accepted: list[ArchiveEntry] = []
        step = "poll"
        generated_feasible = False
        rec = IterationRecord(k, mode_used, center.x.copy(), center.h, step, False, alpha, alpha,
                              0, 0, 0)

        # search step: not implemented (extension point)

        if not barrier and center.h >= tol:
            rec.restoration_tried = True
            before = counter.h_evals
            out = restore(problem, center.x, alpha, cfg.restoration, h_xk=center.h,
                          counter=counter, mesh=mesh)
            restoration_h += counter.h_evals - before
            rec.restoration_satisfied = out.satisfied
            if out.satisfied and counter.f_evals < cfg.max_evals:
                step = "restoration"
                ev = evaluate(problem, out.y_star, counter, h_max=h_max)
                if ev.status is not Status.BARRIER_X and ev.h < tol:
                    generated_feasible = True
                if ev.ok:
                    _, success, accepted = merge_candidates(
                        archive, [ArchiveEntry(out.y_star.copy(), alpha, ev)], alpha, forcing)

        polled = None
        if not success and counter.f_evals < cfg.max_evals:
            step = "poll"
            pss = gen.next()
            cands, stats = poll(problem, center, pss, cfg.max_evals - counter.f_evals, counter,
                                h_max=h_max, feas_tol=tol, feasible_only=barrier)
            polled = (pss, stats)
            rec.poll_evaluated, rec.poll_feasible = stats.n_evaluated, stats.n_feasible
            generated_feasible = generated_feasible or stats.n_feasible > 0
            _, success, accepted = merge_candidates(archive, cands, alpha, forcing)

        alpha_new = step_update(alpha, success, rule)
        apply_step_update(archive, success, center, accepted, alpha_new)

        if not barrier:
            if center_feasible:
                if polled is not None and polled[1].n_evaluated >= 1 and polled[1].n_feasible == 0:
                    state.mode = Mode.INFEASIBLE
                    state.last_feasible_center = center.x.copy()
                    state.last_center_alpha = alpha_new
                    state.last_poll_dirs_maxnorm = polled[0].max_norm
            elif generated_feasible:
                state.mode = Mode.FEASIBLE

        rec.step = step
        rec.success = success
        rec.alpha_new = alpha_new
        rec.evals = counter.f_evals
        rec.archive_size = len(archive)
        rec.n_feasible = sum(1 for e in archive if e.h < tol)
        records.append(rec)
        if on_iteration is not None:
            on_iteration(rec, archive)
        k += 1

    front = [e for e in archive if e.h < tol]
    return RunResult(
        solver="eb" if barrier else "filter-ir",
        archive=archive,
        feasible_front=front,
        evals=counter.f_evals,
        h_evals=counter.h_evals,
        restoration_h_evals=restoration_h,
        log=records,
        stop_reason=stop,
        h_max=h_max,
    )


def run_dms_filter_ir(problem: Problem, cfg: RunConfig | None = None,
                      on_iteration: IterationHook | None = None) -> RunResult:
    """``on_iteration(record, archive)`` is called after every iteration."""
    return _run(problem, cfg or RunConfig(), False, on_iteration)


def run_extreme_barrier(problem: Problem, cfg: RunConfig | None = None,
                        on_iteration: IterationHook | None = None) -> RunResult:
    return _run(problem, cfg or RunConfig(), True, on_iteration)


__all__ = [
    "InitializationError", "IterationRecord", "Mode", "ModeState", "PollStats", "RunConfig",
    "RunResult", "StopReason", "most_isolated", "poll", "run_dms_filter_ir",
    "run_extreme_barrier", "segment_initialization", "select_iterate",
]
