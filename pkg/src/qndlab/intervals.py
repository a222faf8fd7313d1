"""Finite unions of intervals of the real line.

Endpoints are floats produced by root isolation (accurate to about 1e-12).
Open/closed status is not tracked: every quantity computed from these sets is
a Lebesgue measure, for which boundary points are irrelevant.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class IntervalUnion:
    components: tuple[tuple[float, float], ...] = ()

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls(())

    @classmethod
    def interval(cls, lo: float, hi: float) -> "IntervalUnion":
        return cls.from_pairs([(lo, hi)])

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "IntervalUnion":
        items = sorted((float(a), float(b)) for a, b in pairs if b > a)
        merged: list[list[float]] = []
        for a, b in items:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.components))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __bool__(self) -> bool:
        return bool(self.components)

    def __contains__(self, t: float) -> bool:
        return any(a <= t <= b for a, b in self.components)

    def contains_array(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, float)
        out = np.zeros(ts.shape, dtype=bool)
        for a, b in self.components:
            out |= (ts >= a) & (ts <= b)
        return out

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion.from_pairs(self.components + other.components)

    __or__ = union

    def intersection(self, other: "IntervalUnion") -> "IntervalUnion":
        out = []
        i = j = 0
        A, B = self.components, other.components
        while i < len(A) and j < len(B):
            lo = max(A[i][0], B[j][0])
            hi = min(A[i][1], B[j][1])
            if hi > lo:
                out.append((lo, hi))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return IntervalUnion.from_pairs(out)

    __and__ = intersection

    def clip(self, lo: float, hi: float) -> "IntervalUnion":
        return self.intersection(IntervalUnion.interval(lo, hi))

    def complement_in(self, lo: float, hi: float) -> "IntervalUnion":
        out, cur = [], lo
        for a, b in self.clip(lo, hi):
            out.append((cur, a))
            cur = b
        out.append((cur, hi))
        return IntervalUnion.from_pairs(out)

    def shift(self, dt: float) -> "IntervalUnion":
        return IntervalUnion(tuple((a + dt, b + dt) for a, b in self.components))

    def hausdorff_endpoints(self, other: "IntervalUnion") -> float:
        """Largest endpoint discrepancy; ``inf`` if component counts differ."""
        if len(self) != len(other):
            return float("inf")
        if not self:
            return 0.0
        x = np.array(self.components)
        y = np.array(other.components)
        return float(np.max(np.abs(x - y)))

    def to_list(self) -> list[list[float]]:
        return [[a, b] for a, b in self.components]

    @classmethod
    def union_all(cls, parts: Iterable["IntervalUnion"]) -> "IntervalUnion":
        pairs = []
        for p in parts:
            pairs.extend(p.components)
        return cls.from_pairs(pairs)
