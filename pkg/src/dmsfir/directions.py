"""Poll directions and step-size rules."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .problem import ConfigError


class DirectionKind(enum.Enum):
    COORDINATE = "coordinate"
    HALTON = "halton"


@dataclass(frozen=True)
class PositiveSpanningSet:
    dirs: np.ndarray  # shape (k, n), one direction per row
    d_min: float
    d_max: float
    kind: DirectionKind
    index: int = 0

    def __len__(self) -> int:
        return self.dirs.shape[0]

    @property
    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.dirs, axis=1)))


def coordinate_set(n: int) -> PositiveSpanningSet:
    if n < 1:
        raise ConfigError("dimension must be positive")
    eye = np.eye(n)
    return PositiveSpanningSet(np.vstack([eye, -eye]), 1.0, 1.0, DirectionKind.COORDINATE)


def first_primes(k: int) -> list[int]:
    primes: list[int] = []
    cand = 2
    while len(primes) < k:
        if all(cand % p for p in primes if p * p <= cand):
            primes.append(cand)
        cand += 1
    return primes


def radical_inverse(i: int, base: int) -> float:
    # exact in rationals, then one rounding
    value = Fraction(0)
    scale = Fraction(1, base)
    while i > 0:
        i, digit = divmod(i, base)
        value += digit * scale
        scale /= base
    return float(value)


def halton_point(index: int, n: int) -> np.ndarray:
    return np.array([radical_inverse(index, b) for b in first_primes(n)])


def halton_set(n: int, index: int) -> PositiveSpanningSet:
    """Householder reflection of the ``index``-th Halton point, as ``[H, -H]``.

    Indices whose centred point ``2u - 1`` vanishes are skipped; the returned
    set records the index actually used.
    """
    if n < 1 or index < 1:
        raise ConfigError("halton_set needs n >= 1 and index >= 1")
    while True:
        w = 2.0 * halton_point(index, n) - 1.0
        norm = np.linalg.norm(w)
        if norm > 0:
            break
        index += 1
    v = w / norm
    H = np.eye(n) - 2.0 * np.outer(v, v)
    cols = H.T / np.linalg.norm(H.T, axis=1, keepdims=True)
    return PositiveSpanningSet(np.vstack([cols, -cols]), 1.0, 1.0, DirectionKind.HALTON, index)


class DirectionGenerator:
    """Supplies one spanning set per poll; dense sets advance their index."""

    def __init__(self, kind: DirectionKind, n: int, start_index: int = 1):
        self.kind = kind
        self.n = n
        self.index = start_index
        self._coord = coordinate_set(n) if kind is DirectionKind.COORDINATE else None

    def next(self) -> PositiveSpanningSet:
        if self._coord is not None:
            return self._coord
        pss = halton_set(self.n, self.index)
        self.index = pss.index + 1
        return pss


@dataclass(frozen=True)
class StepRule:
    beta1: float = 0.5
    beta2: float = 0.5
    gamma: float = 1.0
    lattice: bool = False
    tau: float = 2.0

    def __post_init__(self):
        if not (0 < self.beta1 <= self.beta2 < 1 <= self.gamma):
            raise ConfigError(
                f"step rule needs 0 < beta1 <= beta2 < 1 <= gamma, got "
                f"({self.beta1}, {self.beta2}, {self.gamma})"
            )
        if self.lattice:
            if self.tau <= 1:
                raise ConfigError("lattice mode needs tau > 1")
            for name, value, lo, hi in (("beta1", self.beta1, None, -1),
                                        ("beta2", self.beta2, -1, -1),
                                        ("gamma", self.gamma, 0, None)):
                k = np.log(value) / np.log(self.tau)
                if abs(k - round(k)) > 1e-12 or (lo is not None and round(k) < lo) \
                        or (hi is not None and round(k) > hi):
                    raise ConfigError(f"lattice mode: {name} = {value} is not an allowed power of tau")


def step_update(alpha: float, success: bool, rule: StepRule) -> float:
    return alpha * (rule.gamma if success else rule.beta2)
