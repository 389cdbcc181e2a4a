"""The nondominated list of (point; step size) pairs over ``(f_1..f_m, h)``."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .problem import ConfigError, Evaluation


class ForcingMode(enum.Enum):
    ZERO = "zero"
    POWER = "power"


@dataclass(frozen=True)
class ForcingFunction:
    """Acceptance margin ``rho(alpha)``.

    ``ZERO`` is the integer-lattice globalization (plain dominance);
    ``POWER`` is ``eta1 * alpha ** (1 + eta2)`` (sufficient decrease).
    """

    mode: ForcingMode = ForcingMode.ZERO
    eta1: float = 1e-4
    eta2: float = 1.0

    def __post_init__(self):
        if self.mode is ForcingMode.POWER and not (self.eta1 > 0 and self.eta2 > 0):
            raise ConfigError("power forcing needs eta1 > 0 and eta2 > 0")

    def __call__(self, alpha: float) -> float:
        if self.mode is ForcingMode.ZERO:
            return 0.0
        return self.eta1 * alpha ** (1.0 + self.eta2)


@dataclass
class ArchiveEntry:
    x: np.ndarray
    alpha: float
    eval: Evaluation
    # stamp from Archive.add; drives deterministic tie-breaking
    serial: int = -1

    @property
    def fbar(self) -> np.ndarray:
        return self.eval.extended()

    @property
    def h(self) -> float:
        return self.eval.h


def dominates(a: Sequence[float], b: Sequence[float], margin: float = 0.0) -> bool:
    """Plain Pareto dominance for ``margin == 0``; sufficient decrease otherwise.

    With a positive margin, ``a`` dominates ``b`` when ``a - margin <= b``
    componentwise (equality allowed).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if margin > 0:
        return bool(np.all(a - margin <= b))
    return bool(np.all(a <= b) and np.any(a < b))


@dataclass
class Archive:
    entries: list[ArchiveEntry] = field(default_factory=list)
    _serial: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def matrix(self) -> np.ndarray:
        if not self.entries:
            return np.empty((0, 0))
        return np.array([e.fbar for e in self.entries])

    def add(self, entry: ArchiveEntry) -> ArchiveEntry:
        entry.serial = self._serial
        self._serial += 1
        self.entries.append(entry)
        return entry

    def contains(self, entry: ArchiveEntry) -> bool:
        return any(e is entry for e in self.entries)

    def key(self) -> list[tuple]:
        """Hashable snapshot of the stored (x, F-bar) pairs."""
        return [(e.x.tobytes(), e.fbar.tobytes()) for e in self.entries]

    def copy(self) -> "Archive":
        return Archive(list(self.entries), self._serial)


def _rejects(stored: np.ndarray, y: np.ndarray, margin: float) -> bool:
    if stored.shape[0] == 0:
        return False
    if margin > 0:
        return bool(np.any(np.all(stored - margin <= y, axis=1)))
    # plain dominance or exact duplicate
    return bool(np.any(np.all(stored <= y, axis=1)))


def merge_candidates(
    archive: Archive,
    candidates: Iterable[ArchiveEntry],
    alpha: float,
    forcing: ForcingFunction,
) -> tuple[Archive, bool, list[ArchiveEntry]]:
    """Merge ``candidates`` in order; returns (archive, success, accepted).

    A candidate is rejected when a stored entry dominates it with margin
    ``forcing(alpha)`` (an exact duplicate is always rejected). Accepted
    candidates are appended and the entries they plainly dominate are
    dropped. ``archive`` is modified in place and also returned.
    """
    margin = forcing(alpha)
    accepted: list[ArchiveEntry] = []
    changed = False
    stored = archive.matrix()
    for cand in candidates:
        if not cand.eval.ok:
            raise ValueError("only entries with status Ok can enter the archive")
        y = cand.fbar
        if _rejects(stored, y, margin):
            continue
        if stored.shape[0]:
            beaten = np.all(y <= stored, axis=1) & np.any(y < stored, axis=1)
            if np.any(beaten):
                archive.entries = [e for e, b in zip(archive.entries, beaten) if not b]
                stored = stored[~beaten]
        archive.add(cand)
        stored = y[None, :] if stored.shape[0] == 0 else np.vstack([stored, y])
        accepted.append(cand)
        changed = True
    accepted = [e for e in accepted if archive.contains(e)]
    return archive, changed, accepted


def filter_front(points: Sequence[Sequence[float]]) -> list[tuple[float, ...]]:
    """Maximal mutually nondominated subset, stable order, duplicates collapsed."""
    pts = [tuple(float(v) for v in p) for p in points]
    if not pts:
        return []
    arr = np.array(pts)
    keep: list[int] = []
    seen: set[tuple[float, ...]] = set()
    for i, p in enumerate(pts):
        if p in seen:
            continue
        le = np.all(arr <= arr[i], axis=1) & np.any(arr < arr[i], axis=1)
        if np.any(le):
            continue
        seen.add(p)
        keep.append(i)
    return [pts[i] for i in keep]


def apply_step_update(
    archive: Archive,
    success: bool,
    center: ArchiveEntry,
    new_entries: Sequence[ArchiveEntry],
    alpha_new: float,
) -> Archive:
    """Step 5 bookkeeping: reset alphas of accepted points and the centre."""
    if success:
        for e in new_entries:
            if archive.contains(e):
                e.alpha = alpha_new
        if archive.contains(center):
            center.alpha = alpha_new
        return archive
    if not archive.contains(center):
        raise RuntimeError("unsuccessful iteration removed the poll centre from the archive")
    center.alpha = alpha_new
    return archive
