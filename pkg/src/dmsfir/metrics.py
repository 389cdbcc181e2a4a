"""Front quality metrics and Dolan-More performance profiles.

All metrics are oriented so that lower table values are better: purity and
hypervolume enter tables as their inverses, and failures are ``+inf``.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .archive import filter_front

log = logging.getLogger(__name__)


class MetricKind(enum.Enum):
    PURITY = "purity"
    HYPERVOLUME = "hv"
    GAMMA = "gamma"
    DELTA = "delta"

    @classmethod
    def parse(cls, text: str) -> "MetricKind":
        for kind in cls:
            if kind.value == text.strip().lower():
                return kind
        raise ValueError(f"unknown metric {text!r}; expected one of {[k.value for k in cls]}")


@dataclass
class Front:
    points: np.ndarray
    solver_id: str = ""
    problem_id: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            self.points = np.empty((0, pts.shape[1] if pts.ndim == 2 else 0))
            return
        if pts.ndim != 2:
            raise ValueError("front points must form a 2-D array (one row per point)")
        self.points = np.array(filter_front(pts), dtype=float).reshape(-1, pts.shape[1])

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]


@dataclass
class Extremes:
    """Per-component best and worst values of a reference front."""

    best: np.ndarray
    worst: np.ndarray


def reference_front(fronts: Sequence[Front]) -> tuple[Front, Extremes]:
    """Nondominated part of the union of ``fronts`` and its extreme values."""
    nonempty = [f for f in fronts if len(f)]
    if not nonempty:
        raise ValueError("cannot build a reference front from empty fronts")
    ms = {f.m for f in nonempty}
    if len(ms) != 1:
        raise ValueError(f"fronts disagree on the number of objectives: {sorted(ms)}")
    problems = {f.problem_id for f in nonempty}
    if len(problems) > 1:
        raise ValueError(f"fronts belong to different problems: {sorted(problems)}")
    ref = Front(np.vstack([f.points for f in nonempty]), "reference", nonempty[0].problem_id)
    return ref, Extremes(ref.points.min(axis=0), ref.points.max(axis=0))


def purity(front: Front, reference: Front, tol: float = 0.0) -> float:
    if not len(front):
        raise ValueError("purity is undefined for an empty front")
    ref = reference.points
    hits = 0
    for p in front.points:
        if ref.shape[0] and np.any(np.all(np.abs(ref - p) <= tol, axis=1)):
            hits += 1
    return hits / len(front)


def hypervolume2(points: np.ndarray | Front, ref_point: Sequence[float]) -> float:
    """Exact area dominated by a biobjective front and bounded by ``ref_point``."""
    pts = points.points if isinstance(points, Front) else np.asarray(points, dtype=float)
    ref = np.asarray(ref_point, dtype=float)
    if pts.size == 0:
        return 0.0
    if pts.shape[1] != 2 or ref.shape != (2,):
        raise ValueError("hypervolume2 handles two objectives only")
    for p in pts:
        if np.any(p > ref):
            raise ValueError(f"point {tuple(p)} does not dominate the reference point {tuple(ref)}")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    area = 0.0
    best_f2 = ref[1]
    for i in order:
        f1, f2 = pts[i]
        if f2 < best_f2:
            area += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return float(area)


def hv_reference_point(fronts: Sequence[Front], margin: float = 0.01) -> np.ndarray:
    """Componentwise worst over all fronts, pushed out by ``margin`` of the span."""
    pts = np.vstack([f.points for f in fronts if len(f)])
    worst, best = pts.max(axis=0), pts.min(axis=0)
    span = worst - best
    # degenerate span: fall back to a margin relative to the magnitude
    span = np.where(span > 0, span, np.maximum(1.0, np.abs(worst)))
    return worst + margin * span


def _gaps(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return np.diff(np.concatenate([[lo], np.sort(values), [hi]]))


def gamma_metric(front: Front, extremes: Extremes) -> float:
    """Largest gap along any component, extremes included."""
    if not len(front):
        raise ValueError("gamma is undefined for an empty front")
    return float(max(np.max(_gaps(front.points[:, j], extremes.best[j], extremes.worst[j]))
                     for j in range(front.m)))


def delta_metric(front: Front, extremes: Extremes) -> float:
    """Spread unevenness: worst component of the Delta ratio."""
    if not len(front):
        raise ValueError("delta is undefined for an empty front")
    n = len(front)
    worst = 0.0
    for j in range(front.m):
        d = _gaps(front.points[:, j], extremes.best[j], extremes.worst[j])
        ends = d[0] + d[-1]
        inner = d[1:-1]
        if inner.size:
            mean = float(inner.mean())
            num = ends + float(np.sum(np.abs(inner - mean)))
            den = ends + (n - 1) * mean
        else:
            num = den = ends
        worst = max(worst, num / den if den > 0 else 0.0)
    return float(worst)


@dataclass
class MetricTable:
    kind: MetricKind
    problems: list[str]
    solvers: list[str]
    values: np.ndarray  # shape (len(problems), len(solvers)), lower is better
    # raw metric values before inversion, for reporting
    raw: np.ndarray | None = None
    hv_refs: dict[str, np.ndarray] = field(default_factory=dict)


def _inverse(v: float) -> float:
    return math.inf if not v > 0 else 1.0 / v


def metric_table(fronts: Mapping[str, Mapping[str, Front | None]], kind: MetricKind,
                 solvers: Sequence[str] | None = None, purity_tol: float = 0.0) -> MetricTable:
    """Table of ``t_{p,s}`` for one metric.

    ``fronts[problem][solver]`` is the solver's front, or ``None``/empty when
    the run failed. Problems with no usable front at all are dropped.
    """
    if solvers is None:
        solvers = sorted({s for row in fronts.values() for s in row})
    problems: list[str] = []
    rows, raws = [], []
    refs: dict[str, np.ndarray] = {}
    for prob in sorted(fronts):
        row = fronts[prob]
        present = [row.get(s) for s in solvers]
        usable = [f for f in present if f is not None and len(f)]
        if not usable:
            log.warning("problem %s: no solver produced a front; dropped", prob)
            continue
        ref, ext = reference_front(usable)
        hv_ref = hv_reference_point(usable) if kind is MetricKind.HYPERVOLUME else None
        if hv_ref is not None:
            refs[prob] = hv_ref
        t_row, raw_row = [], []
        for f in present:
            if f is None or not len(f):
                t_row.append(math.inf)
                raw_row.append(math.nan)
                continue
            if kind is MetricKind.PURITY:
                v = purity(f, ref, purity_tol)
                t = _inverse(v)
            elif kind is MetricKind.HYPERVOLUME:
                v = hypervolume2(f, hv_ref)
                t = _inverse(v)
            elif kind is MetricKind.GAMMA:
                v = t = gamma_metric(f, ext)
            else:
                v = t = delta_metric(f, ext)
            t_row.append(t)
            raw_row.append(v)
        problems.append(prob)
        rows.append(t_row)
        raws.append(raw_row)
    shape = (len(problems), len(solvers))
    return MetricTable(kind, problems, list(solvers),
                       np.array(rows, dtype=float).reshape(shape),
                       np.array(raws, dtype=float).reshape(shape), refs)


def performance_profiles(table: MetricTable) -> dict[str, list[tuple[float, float]]]:
    """Step-function profiles ``rho_s(tau)`` evaluated at every breakpoint.

    Each list starts at ``tau = 1`` and is right-continuous: the value at a
    breakpoint already counts the problems whose ratio equals it.
    """
    values = np.asarray(table.values, dtype=float)
    keep = []
    for i, prob in enumerate(table.problems):
        if np.all(np.isinf(values[i])):
            log.warning("problem %s: no finite metric value; dropped from the profile", prob)
        else:
            keep.append(i)
    if not keep:
        return {s: [(1.0, 0.0)] for s in table.solvers}
    t = values[keep]
    best = t.min(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(best > 0, t / np.where(best > 0, best, 1.0),
                          np.where(t == best, 1.0, math.inf))
    finite = ratios[np.isfinite(ratios)]
    taus = np.unique(np.concatenate([[1.0], finite]))
    n_prob = len(keep)
    out: dict[str, list[tuple[float, float]]] = {}
    for j, s in enumerate(table.solvers):
        col = np.sort(ratios[:, j])
        counts = np.searchsorted(col, taus, side="right")
        out[s] = [(float(tau), float(c) / n_prob) for tau, c in zip(taus, counts)]
    return out


def load_front_csv(path: str | Path, solver_id: str = "", problem_id: str = "",
                   feas_tol: float | None = 1e-5) -> Front:
    """Read objective columns ``f1, f2, ...`` (or ``f_1, ...``) from a CSV.

    Rows with an ``h`` column at or above ``feas_tol`` are skipped, so a
    solver's stored archive reduces to its feasible front.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        cols = []
        k = 1
        while True:
            name = next((c for c in (f"f{k}", f"f_{k}") if c in header), None)
            if name is None:
                break
            cols.append(name)
            k += 1
        if not cols:
            raise ValueError(f"{path}: no objective columns (expected f1 or f_1 headers)")
        rows = []
        for rec in reader:
            if feas_tol is not None and "h" in header and not float(rec["h"]) < feas_tol:
                continue
            rows.append([float(rec[c]) for c in cols])
    pts = np.array(rows, dtype=float).reshape(-1, len(cols))
    return Front(pts, solver_id, problem_id)


def write_metric_table(tables: Sequence[MetricTable], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["problem", "solver", "metric", "value"])
        for table in tables:
            for i, prob in enumerate(table.problems):
                for j, s in enumerate(table.solvers):
                    w.writerow([prob, s, table.kind.value, repr(float(table.values[i, j]))])


def write_profile(profile: Mapping[str, list[tuple[float, float]]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["solver", "tau", "rho"])
        for s, curve in profile.items():
            for tau, rho in curve:
                w.writerow([s, repr(tau), repr(rho)])
