"""Real root isolation and polynomial sublevel sets.

Roots are isolated by the derivative cascade: the sign-changing roots of
``p'`` split ``[lo, hi]`` into pieces on which ``p`` is monotone, and each
piece holds at most one crossing of any level, found by bisection.  This
never needs a square-free decomposition and handles every level of a band
``lower < p < upper`` with one set of pieces, which is what sublevel-set
measures need.  Sturm sequences over ``Fraction`` are provided as an
independent exact root counter.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npp

from .intervals import IntervalUnion

_MAX_BISECT = 200


def _coeffs(p) -> np.ndarray:
    c = np.asarray(p.as_float() if hasattr(p, "as_float") else p, dtype=float)
    c = np.atleast_1d(c)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return np.zeros(1)
    return c[: nz[-1] + 1]


def solve_monotone(c: np.ndarray, a, b, level) -> np.ndarray:
    """Vectorised bisection for ``p(t) = level`` on brackets ``[a, b]``.

    ``p`` must be monotone on each bracket and ``p - level`` must not have the
    same strict sign at both ends.
    """
    a = np.array(a, dtype=float, copy=True)
    b = np.array(b, dtype=float, copy=True)
    a, b, level = np.broadcast_arrays(a, b, np.asarray(level, dtype=float))
    a, b, level = a.copy(), b.copy(), level.copy()
    fa = npp.polyval(a, c) - level
    for _ in range(_MAX_BISECT):
        width = b - a
        if np.all(width <= 2 * np.spacing(np.maximum(np.abs(a), np.abs(b)))):
            break
        mid = 0.5 * (a + b)
        fm = npp.polyval(mid, c) - level
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, mid, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, mid)
    return 0.5 * (a + b)


def sign_change_roots(p, lo: float, hi: float) -> np.ndarray:
    """Roots in ``(lo, hi)`` at which ``p`` changes sign, sorted."""
    c = _coeffs(p)
    deg = len(c) - 1
    if deg <= 0 or not hi > lo:
        return np.empty(0)
    if deg == 1:
        r = -c[0] / c[1]
        return np.array([r]) if lo < r < hi else np.empty(0)
    crit = sign_change_roots(npp.polyder(c), lo, hi)
    pts = np.concatenate(([lo], crit, [hi]))
    vals = npp.polyval(pts, c)
    # values within evaluation rounding noise count as zero
    noise = 8 * np.finfo(float).eps * npp.polyval(np.abs(pts), np.abs(c))
    vals = np.where(np.abs(vals) <= noise, 0.0, vals)
    s = np.sign(vals)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    roots = []
    if idx.size:
        roots.extend(solve_monotone(c, pts[idx], pts[idx + 1], 0.0))
    # exact zeros at interior breakpoints that are genuine sign changes
    for j in range(1, len(pts) - 1):
        if vals[j] == 0 and s[j - 1] * s[j + 1] < 0:
            roots.append(pts[j])
    return np.unique(np.asarray(roots, dtype=float))


def critical_points(p, lo: float, hi: float) -> np.ndarray:
    """Interior points where ``p`` switches between increasing and decreasing."""
    c = _coeffs(p)
    if len(c) <= 2:
        return np.empty(0)
    return sign_change_roots(npp.polyder(c), lo, hi)


def monotone_pieces(p, lo: float, hi: float) -> np.ndarray:
    return np.concatenate(([lo], critical_points(p, lo, hi), [hi]))


def sup_abs(p, lo: float, hi: float) -> float:
    c = _coeffs(p)
    pts = monotone_pieces(c, lo, hi)
    return float(np.max(np.abs(npp.polyval(pts, c))))


def extrema(p, lo: float, hi: float) -> tuple[float, float]:
    c = _coeffs(p)
    vals = npp.polyval(monotone_pieces(c, lo, hi), c)
    return float(vals.min()), float(vals.max())


def _band_pieces(c, P, Q, lower, upper):
    """Start/end of ``{lower < p < upper}`` on monotone pieces ``[P, Q]``.

    All arguments broadcast together; returns ``(start, end)`` arrays with
    ``end <= start`` meaning empty.
    """
    P, Q, lower, upper = np.broadcast_arrays(
        np.asarray(P, float), np.asarray(Q, float), np.asarray(lower, float), np.asarray(upper, float)
    )
    fp = npp.polyval(P, c)
    fq = npp.polyval(Q, c)
    inc = fq >= fp

    start = np.where(inc, P, P).astype(float)
    end = np.where(inc, Q, Q).astype(float)

    # increasing: enter when p crosses lower, leave when p crosses upper
    # decreasing: enter when p crosses upper, leave when p crosses lower
    enter_level = np.where(inc, lower, upper)
    leave_level = np.where(inc, upper, lower)
    f_start_ok = np.where(inc, fp > lower, fp < upper)
    f_end_ok = np.where(inc, fq < upper, fq > lower)
    reach_enter = np.where(inc, fq > lower, fq < upper)
    reach_leave = np.where(inc, fp < upper, fp > lower)

    need = ~f_start_ok & reach_enter & np.isfinite(enter_level)
    start = np.where(f_start_ok, P, np.where(reach_enter, start, Q))
    if need.any():
        start[need] = solve_monotone(c, P[need], Q[need], enter_level[need])

    need = ~f_end_ok & reach_leave & np.isfinite(leave_level)
    end = np.where(f_end_ok, Q, np.where(reach_leave, end, P))
    if need.any():
        end[need] = solve_monotone(c, P[need], Q[need], leave_level[need])
    return start, end


def band_set(p, lo: float, hi: float, lower: float = -np.inf, upper: float = np.inf) -> IntervalUnion:
    """``{t in [lo, hi] : lower < p(t) < upper}`` as an interval union."""
    if not hi > lo:
        return IntervalUnion.empty()
    c = _coeffs(p)
    pts = monotone_pieces(c, lo, hi)
    start, end = _band_pieces(c, pts[:-1], pts[1:], lower, upper)
    return IntervalUnion.from_pairs(
        (float(s), float(e)) for s, e in zip(start, end) if e > s
    )


def sublevel_set(p, lo: float, hi: float, level: float) -> IntervalUnion:
    """``{t in [lo, hi] : p(t) < level}``."""
    return band_set(p, lo, hi, -np.inf, level)


def band_measures(p, intervals: np.ndarray, lower: np.ndarray, upper: np.ndarray, *,
                  crit: np.ndarray | None = None) -> np.ndarray:
    """Measures of ``{t in J_i : lower_ij < p < upper_ij}`` for many ``(J_i, j)``.

    ``intervals`` has shape ``(n, 2)``; ``lower``/``upper`` have shape
    ``(n, m)``.  ``crit`` may carry precomputed critical points covering
    every ``J_i``.
    """
    c = _coeffs(p)
    intervals = np.asarray(intervals, float)
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    n = intervals.shape[0]
    if crit is None:
        crit = critical_points(c, float(intervals[:, 0].min()), float(intervals[:, 1].max()))
    rows, P, Q = [], [], []
    for i in range(n):
        a, b = intervals[i]
        inner = crit[(crit > a) & (crit < b)]
        pts = np.concatenate(([a], inner, [b]))
        rows.extend([i] * (len(pts) - 1))
        P.extend(pts[:-1])
        Q.extend(pts[1:])
    rows = np.asarray(rows)
    P = np.asarray(P)[:, None]
    Q = np.asarray(Q)[:, None]
    s, e = _band_pieces(c, P, Q, lower[rows], upper[rows])
    out = np.zeros(lower.shape)
    np.add.at(out, rows, np.clip(e - s, 0.0, None))
    return out


# -- exact Sturm counting ----------------------------------------------------

def _frac_coeffs(p) -> list[Fraction]:
    coeffs = p.coeffs if hasattr(p, "coeffs") else p
    c = [Fraction(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    while len(a) >= len(b) and any(a):
        q = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, x in enumerate(b):
            a[i + shift] -= q * x
        a.pop()
        while len(a) > 1 and a[-1] == 0:
            a.pop()
    return a if a else [Fraction(0)]


def sturm_sequence(p) -> list[list[Fraction]]:
    f0 = _frac_coeffs(p)
    f1 = [i * x for i, x in enumerate(f0)][1:] or [Fraction(0)]
    seq = [f0, f1]
    while len(seq[-1]) > 1 or seq[-1][0] != 0:
        r = _rem(seq[-2], seq[-1])
        if len(r) == 1 and r[0] == 0:
            break
        seq.append([-x for x in r])
    return seq


def _eval(c: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for x in reversed(c):
        acc = acc * t + x
    return acc


def _variations(seq, t) -> int:
    signs = [v for v in (_eval(c, t) for c in seq) if v != 0]
    return sum(1 for x, y in zip(signs, signs[1:]) if (x > 0) != (y > 0))


def sturm_count(p, a, b) -> int:
    """Number of distinct real roots of ``p`` in ``(a, b]`` (exact)."""
    seq = sturm_sequence(p)
    return _variations(seq, Fraction(a)) - _variations(seq, Fraction(b))
