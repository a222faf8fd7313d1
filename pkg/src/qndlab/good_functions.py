"""(C, alpha)-good functions: polynomials, their square roots, flow covolumes.

``f`` is (C, alpha)-good on ``B`` if for every subinterval ``J`` and every
``eps > 0``::

    m{t in J : |f(t)| < eps} <= C (eps / sup_J |f|)^alpha m(J)

Measures are exact up to root-isolation tolerance; sups are taken at
critical points.  :func:`verify_goodness` checks the inequality on a finite
grid of subintervals and levels.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .config import TOL
from .errors import NegativeFunction
from .intervals import IntervalUnion
from .lattice_geometry import LatticeBasis
from .poly import Poly, matrix_power_series
from .roots import band_measures, band_set, critical_points, extrema, sup_abs


@dataclass(frozen=True)
class PolyFunction:
    """A polynomial ``p`` or, with ``sqrt=True``, the function ``sqrt(p)``."""

    inner: Poly
    sqrt: bool = False
    degree_bound: int | None = None

    def __post_init__(self):
        if not isinstance(self.inner, Poly):
            object.__setattr__(self, "inner", Poly(self.inner))
        if self.degree_bound is None:
            object.__setattr__(self, "degree_bound", max(self.inner.degree, 0))
        if self.degree_bound < self.inner.degree:
            raise ValueError(f"degree bound {self.degree_bound} below degree {self.inner.degree}")

    @classmethod
    def polynomial(cls, coeffs: Sequence) -> "PolyFunction":
        return cls(Poly(coeffs))

    @property
    def coeffs(self) -> np.ndarray:
        return self.inner.as_float()

    def __call__(self, t):
        v = self.inner(np.asarray(t, float)) if not np.isscalar(t) else float(self.inner(float(t)))
        if self.sqrt:
            return np.sqrt(np.maximum(v, 0.0))
        return v

    def sup(self, lo: float, hi: float) -> float:
        """``sup |f|`` on ``[lo, hi]``."""
        if self.sqrt:
            return float(np.sqrt(max(extrema(self.coeffs, lo, hi)[1], 0.0)))
        return sup_abs(self.coeffs, lo, hi)

    def _band(self, eps):
        eps = np.asarray(eps, float)
        if self.sqrt:
            return np.full(eps.shape, -np.inf), eps * eps
        return -eps, eps

    def sublevel(self, lo: float, hi: float, eps: float) -> IntervalUnion:
        """``{t in [lo, hi] : |f(t)| < eps}``."""
        lower, upper = self._band(eps)
        return band_set(self.coeffs, lo, hi, float(lower), float(upper))

    def nonnegative_on(self, lo: float, hi: float) -> bool:
        lo_val, hi_val = extrema(self.coeffs, lo, hi)
        return lo_val >= -TOL.goodness_slack * max(1.0, abs(hi_val))


def sublevel_measure(f: PolyFunction, J: tuple[float, float], eps: float) -> float:
    if eps <= 0:
        raise ValueError("eps must be positive")
    return f.sublevel(J[0], J[1], eps).measure


def polynomial_goodness_constants(k: int) -> tuple[float, float]:
    """Constants for polynomials of degree at most ``k``."""
    if k < 1:
        raise ValueError("degree must be at least 1")
    return k * (k + 1) ** (1.0 / k), 1.0 / k


def covolume_goodness_constants(k: int) -> tuple[float, float]:
    """Constants for ``t -> ||h_t Delta||`` with ``h_t`` unipotent on ``R^k``."""
    return k * k * (k * k + 1) ** (1.0 / (k * k)), 1.0 / (k * k)


@dataclass(frozen=True)
class GoodnessGrid:
    """Sampling plan: random subintervals times log-spaced ``eps / sup`` ratios."""

    n_subintervals: int = 50
    n_eps: int = 20
    ratio_min: float = 1e-6
    ratio_max: float = 2.0
    seed: int = 0

    def subintervals(self, lo: float, hi: float) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        pts = np.sort(rng.uniform(lo, hi, size=(self.n_subintervals - 1, 2)), axis=1)
        J = np.vstack([[lo, hi], pts])
        return J[J[:, 1] > J[:, 0]]

    def ratios(self) -> np.ndarray:
        return np.geomspace(self.ratio_min, self.ratio_max, self.n_eps)


@dataclass(frozen=True)
class GoodnessCertificate:
    C: float
    alpha: float
    interval: tuple[float, float]
    worst_ratio: float
    worst_case: tuple[float, float, float] | None  # (J lo, J hi, eps)
    grid: GoodnessGrid = field(default_factory=GoodnessGrid)

    @property
    def passed(self) -> bool:
        return self.worst_ratio <= 1 + TOL.goodness_slack


def verify_goodness(f: PolyFunction, C: float, alpha: float, J: tuple[float, float],
                    grid: GoodnessGrid | None = None) -> GoodnessCertificate:
    grid = grid or GoodnessGrid()
    lo, hi = float(J[0]), float(J[1])
    subs = grid.subintervals(lo, hi)
    ratios = grid.ratios()
    c = f.coeffs
    crit = critical_points(c, lo, hi)
    sups = np.array([f.sup(a, b) for a, b in subs])
    eps = sups[:, None] * ratios[None, :]
    lower, upper = f._band(eps)
    meas = band_measures(c, subs, lower, upper, crit=crit)
    lengths = (subs[:, 1] - subs[:, 0])[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = C * ratios[None, :] ** alpha * lengths
        r = np.where(sups[:, None] > 0, meas / bound, 0.0)
    i, j = np.unravel_index(int(np.argmax(r)), r.shape)
    worst = float(r[i, j])
    case = (float(subs[i, 0]), float(subs[i, 1]), float(eps[i, j]))
    return GoodnessCertificate(C, alpha, (lo, hi), worst, case, grid)


def sqrt_goodness(f: PolyFunction, C: float, alpha: float,
                  domain: tuple[float, float]) -> tuple[PolyFunction, float, float]:
    """Wrap ``sqrt(f)`` and return it with constants ``(C, 2 alpha)``."""
    if f.sqrt:
        raise ValueError("already a square root")
    if not f.nonnegative_on(*domain):
        raise NegativeFunction(f"polynomial takes negative values on {domain}")
    return PolyFunction(f.inner, sqrt=True, degree_bound=f.degree_bound), C, 2 * alpha


# -- covolume along a unipotent flow -------------------------------------------------

def _is_exact_array(A) -> bool:
    for x in np.asarray(A, dtype=object).ravel():
        if isinstance(x, (int, Fraction, np.integer)):
            continue
        if isinstance(x, (float, np.floating)) and float(x).is_integer():
            continue
        return False
    return True


def _to_exact(A) -> list[list]:
    return [[Fraction(x) if not isinstance(x, (float, np.floating)) else Fraction(int(x)) for x in row]
            for row in np.asarray(A, dtype=object)]


def _poly_minors(P: list[list[Poly]], m: int, k: int):
    @lru_cache(maxsize=None)
    def det(row: int, cols: tuple[int, ...]) -> Poly:
        if row == m:
            return Poly((1,))
        acc = Poly()
        for pos, col in enumerate(cols):
            entry = P[row][col]
            if entry.is_zero():
                continue
            sub = det(row + 1, cols[:pos] + cols[pos + 1:])
            term = entry * sub
            acc = acc + term if pos % 2 == 0 else acc - term
        return acc

    return {S: det(0, S) for S in itertools.combinations(range(k), m)}


def covolume_flow_inner(N, D, G) -> Poly:
    """``det(P_t G P_t^T)`` with ``P_t = D exp(tN)^T``, by Cauchy-Binet.

    ``N`` is nilpotent ``k x k``, ``D`` holds ``m`` generators as rows and
    ``G`` is the ambient Gram matrix.  Runs over ``Fraction`` when all three
    are integral or rational.
    """
    exact = _is_exact_array(N) and _is_exact_array(D) and _is_exact_array(G)
    if exact:
        N_, D_, G_ = _to_exact(N), _to_exact(D), _to_exact(G)
    else:
        N_ = np.asarray(N, float).tolist()
        D_ = np.asarray(D, float).tolist()
        G_ = np.asarray(G, float)
    k = len(N_)
    m = len(D_)
    if m == 0:
        return Poly((1,))
    h = matrix_power_series(N_)
    # P[i][j] = sum_l D[i][l] h[j][l]
    P = [[sum((h[j][l] * D_[i][l] for l in range(k) if D_[i][l] != 0), Poly())
          for j in range(k)] for i in range(m)]
    minors = _poly_minors(P, m, k)
    Gm = np.asarray(G_, dtype=object if exact else float)
    subsets = list(minors)
    diagonal = all(Gm[i][j] == 0 for i in range(k) for j in range(k) if i != j)
    total = Poly()
    for S in subsets:
        if minors[S].is_zero():
            continue
        pairs = [S] if diagonal else subsets
        for T in pairs:
            if minors[T].is_zero():
                continue
            g = _det_small([[Gm[a][b] for b in T] for a in S], exact)
            if g == 0:
                continue
            total = total + minors[S] * minors[T] * g
    return total


def _det_small(M: list[list], exact: bool):
    n = len(M)
    if not exact:
        return float(np.linalg.det(np.array(M, float))) if n else 1.0
    if n == 0:
        return Fraction(1)
    A = [list(map(Fraction, r)) for r in M]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return det


def covolume_flow_function(u, delta: LatticeBasis) -> PolyFunction:
    """``t -> ||h_t Delta||`` as the square root of an explicit polynomial.

    ``u`` is either an :class:`~qndlab.lie_core.AlgebraVector` (``h_t =
    Ad(exp(tu))``, lattice in algebra coordinates) or a nilpotent matrix
    acting on the coordinates of ``delta``.
    """
    from .lie_core import AlgebraVector, ad, nilpotency_degree

    N = ad(u) if isinstance(u, AlgebraVector) else np.asarray(u)
    deg = nilpotency_degree(np.asarray(N, float))
    D = [list(r) for r in delta.exact] if delta.exact is not None else delta.vectors
    G = delta.gram
    inner = covolume_flow_inner(N, D, G)
    bound = 2 * delta.rank * (deg - 1)
    return PolyFunction(inner, sqrt=True, degree_bound=max(bound, inner.degree, 0))


def constancy_test(f: PolyFunction) -> float | None:
    """The constant value if the inner polynomial is constant, else ``None``."""
    c = f.coeffs
    c0 = float(c[0])
    if np.all(np.abs(c[1:]) <= TOL.constancy * max(1.0, abs(c0))):
        return float(np.sqrt(max(c0, 0.0))) if f.sqrt else c0
    return None
