"""Exact arithmetic for elements of discrete subgroups.

Entries are ``Fraction`` (real factors) or :class:`GaussianRational`
(complex factors).  A group element of a product group is a tuple of 2x2
blocks, one per factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np


class GaussianRational:
    """``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _lift(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        return GaussianRational(x, 0)

    def __add__(self, other):
        o = self._lift(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = self._lift(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        d = o.re * o.re + o.im * o.im
        n = self * GaussianRational(o.re, -o.im)
        return GaussianRational(n.re / d, n.im / d)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im)) if self.im else hash(self.re)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    @property
    def is_real(self) -> bool:
        return self.im == 0


Scalar = Union[Fraction, GaussianRational]

def parse_scalar(value) -> Scalar:
    """Parse ``3``, ``"1/2"``, ``"1+2i"``, ``"-i"``, ``"3/2-1/2i"``."""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, float):
        raise ValueError(f"refusing inexact float entry {value!r}; use a fraction string")
    s = str(value).replace(" ", "")
    if not s.endswith("i"):
        return Fraction(s)
    body = s[:-1]
    # split at the last sign that is not the leading one
    cut = max(body.rfind("+"), body.rfind("-"))
    if cut <= 0:
        real, imag = "0", body
    else:
        real, imag = body[:cut], body[cut:]
    if imag in ("", "+"):
        imag = "1"
    elif imag == "-":
        imag = "-1"
    return GaussianRational(Fraction(real), Fraction(imag))


def format_scalar(x: Scalar) -> str:
    if isinstance(x, GaussianRational):
        if x.im == 0:
            return str(x.re)
        sign = "+" if x.im > 0 else "-"
        return f"{x.re}{sign}{abs(x.im)}i"
    return str(x)


Block = tuple[tuple[Scalar, Scalar], tuple[Scalar, Scalar]]


def _block_mul(A: Block, B: Block) -> Block:
    (a, b), (c, d) = A
    (e, f), (g, h) = B
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def _block_inv(A: Block) -> Block:
    # determinant one
    (a, b), (c, d) = A
    return ((d, -b), (-c, a))


def _block_det(A: Block):
    (a, b), (c, d) = A
    return a * d - b * c


def _is_identity(A: Block) -> bool:
    (a, b), (c, d) = A
    return a == 1 and d == 1 and b == 0 and c == 0


@dataclass(frozen=True)
class ExactElement:
    """Element of ``SL(2,K_1) x ... x SL(2,K_n)`` with exact entries."""

    blocks: tuple[Block, ...]

    @classmethod
    def from_entries(cls, *blocks) -> "ExactElement":
        parsed = tuple(
            tuple(tuple(parse_scalar(x) for x in row) for row in blk) for blk in blocks
        )
        el = cls(parsed)
        for i, blk in enumerate(el.blocks):
            if _block_det(blk) != 1:
                raise ValueError(f"factor {i} has determinant {_block_det(blk)}, expected 1")
        return el

    @classmethod
    def identity(cls, n_factors: int = 1) -> "ExactElement":
        one, zero = Fraction(1), Fraction(0)
        return cls(tuple(((one, zero), (zero, one)) for _ in range(n_factors)))

    @property
    def n_factors(self) -> int:
        return len(self.blocks)

    def __matmul__(self, other: "ExactElement") -> "ExactElement":
        return ExactElement(tuple(_block_mul(a, b) for a, b in zip(self.blocks, other.blocks)))

    def inverse(self) -> "ExactElement":
        return ExactElement(tuple(_block_inv(a) for a in self.blocks))

    def __pow__(self, n: int) -> "ExactElement":
        base = self if n >= 0 else self.inverse()
        out = ExactElement.identity(self.n_factors)
        for _ in range(abs(n)):
            out = out @ base
        return out

    def is_identity(self) -> bool:
        return all(_is_identity(b) for b in self.blocks)

    def factor_is_identity(self, i: int) -> bool:
        return _is_identity(self.blocks[i])

    def factor_is_minus_identity(self, i: int) -> bool:
        (a, b), (c, d) = self.blocks[i]
        return a == -1 and d == -1 and b == 0 and c == 0

    def trace(self, i: int = 0) -> Scalar:
        (a, _), (_, d) = self.blocks[i]
        return a + d

    def determinants(self) -> tuple:
        return tuple(_block_det(b) for b in self.blocks)

    def factor_array(self, i: int) -> np.ndarray:
        blk = self.blocks[i]
        if any(isinstance(x, GaussianRational) for row in blk for x in row):
            return np.array([[complex(x) if isinstance(x, GaussianRational) else complex(float(x))
                              for x in row] for row in blk])
        return np.array([[float(x) for x in row] for row in blk])

    def to_numpy(self, dtype=None) -> np.ndarray:
        """Block-diagonal float/complex matrix."""
        blocks = [self.factor_array(i) for i in range(self.n_factors)]
        if dtype is None:
            dtype = complex if any(np.iscomplexobj(b) for b in blocks) else float
        n = 2 * len(blocks)
        out = np.zeros((n, n), dtype=dtype)
        for i, b in enumerate(blocks):
            out[2 * i:2 * i + 2, 2 * i:2 * i + 2] = b
        return out

    def to_strings(self) -> list:
        return [[[format_scalar(x) for x in row] for row in blk] for blk in self.blocks]


def is_elliptic_block(el: ExactElement, i: int) -> bool:
    """Elliptic means conjugate into the maximal compact subgroup, nontrivial.

    For 2x2 blocks of determinant one: real trace in (-2, 2), or the block is
    ``-I``.
    """
    if el.factor_is_identity(i):
        return False
    if el.factor_is_minus_identity(i):
        return True
    tr = el.trace(i)
    if isinstance(tr, GaussianRational):
        if tr.im != 0:
            return False
        tr = tr.re
    return -2 < tr < 2


def words_product(generators: Iterable[ExactElement]) -> ExactElement:
    gens = list(generators)
    out = ExactElement.identity(gens[0].n_factors)
    for g in gens:
        out = out @ g
    return out
