"""Dense univariate polynomials over any number type.

Coefficients are stored low degree first.  The arithmetic is written against
plain Python operators so the same code runs on ``Fraction`` (exact) and
``float`` coefficients; numerics that need floats convert with
:meth:`Poly.as_float`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npp


def _trim(coeffs: Sequence) -> tuple:
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c) if c else (0,)


@dataclass(frozen=True)
class Poly:
    coeffs: tuple

    def __init__(self, coeffs: Iterable = (0,)):
        object.__setattr__(self, "coeffs", _trim(tuple(coeffs)))

    @classmethod
    def constant(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def monomial(cls, degree: int, c=1) -> "Poly":
        return cls((0,) * degree + (c,))

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return -1
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.degree < 0

    def __add__(self, other) -> "Poly":
        other = other if isinstance(other, Poly) else Poly.constant(other)
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Poly(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
        )

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other) -> "Poly":
        other = other if isinstance(other, Poly) else Poly.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return Poly.constant(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return Poly(c * other for c in self.coeffs)
        a, b = self.coeffs, other.coeffs
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
        return Poly(out)

    __rmul__ = __mul__

    def __call__(self, t):
        if isinstance(t, np.ndarray):
            return npp.polyval(t, self.as_float())
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def deriv(self) -> "Poly":
        return Poly(i * c for i, c in enumerate(self.coeffs) if i > 0) if len(self.coeffs) > 1 else Poly()

    def as_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)

    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)!r})"


def poly_dot(row_a: Sequence[Poly], row_b: Sequence[Poly]) -> Poly:
    acc = Poly()
    for a, b in zip(row_a, row_b):
        acc = acc + a * b
    return acc


def matrix_power_series(N: Sequence[Sequence], order: int | None = None) -> list[list[Poly]]:
    """Entries of ``exp(t N)`` as polynomials in ``t`` for nilpotent ``N``.

    The series is cut once ``N**j`` vanishes exactly (exact input) or
    numerically (float input); ``order`` forces a cut-off.
    """
    k = len(N)
    mat = [list(row) for row in N]
    exact = all(isinstance(x, (int, Fraction)) for row in mat for x in row)
    terms = [[[1 if i == j else 0 for j in range(k)] for i in range(k)]]
    power = terms[0]
    fact = 1
    limit = k if order is None else order
    scale = max((abs(float(x)) for row in mat for x in row), default=0.0)
    for j in range(1, limit + 1):
        power = [
            [sum(power[i][l] * mat[l][c] for l in range(k)) for c in range(k)]
            for i in range(k)
        ]
        if exact:
            if all(x == 0 for row in power for x in row):
                break
        elif max(abs(float(x)) for row in power for x in row) <= 1e-14 * max(1.0, scale) ** j:
            break
        fact *= j
        terms.append([[x / fact if exact is False else Fraction(x) / fact for x in row] for row in power])
    return [
        [Poly(terms[d][i][c] for d in range(len(terms))) for c in range(k)]
        for i in range(k)
    ]
