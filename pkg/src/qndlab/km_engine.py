"""Quantitative non-divergence for unipotent flows on spaces of lattices.

Lattices may be given in plain Euclidean coordinates with a nilpotent
matrix ``N`` (``h_t = exp(tN)``) or in Lie algebra coordinates with an
:class:`~qndlab.lie_core.AlgebraVector` ``u`` (``h_t = Ad(exp(tu))``).  In
the second case the lattice's Gram matrix should be the algebra's inner
product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
import scipy.linalg

from .config import MAX_ENUMERATION, TOL
from .errors import BudgetExceeded, PreconditionViolation
from .good_functions import constancy_test, covolume_flow_function
from .intervals import IntervalUnion
from .lattice_geometry import LatticeBasis, covolume, lll_reduce, primitive_subgroups_below, short_vectors
from .lie_core import AlgebraVector, ad, flow_coefficients, quadratic_form_polynomial
from .roots import sublevel_set


@dataclass(frozen=True)
class KMConstants:
    k: int
    l_M: int = 2
    r0: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.l_M < 1:
            raise ValueError("l_M must be at least 1")
        if self.r0 is None:
            object.__setattr__(self, "r0", 0.1 / self.k)
        if not 0 < self.r0 < 1.0 / self.k:
            raise ValueError(f"r0 must lie in (0, 1/k) = (0, {1 / self.k:.4g})")

    @classmethod
    def for_algebra(cls, spec, l_M: int | None = None, r0: float | None = None) -> "KMConstants":
        return cls(spec.dim, spec.default_l_M if l_M is None else l_M,
                   spec.default_r0 if r0 is None else r0)

    @property
    def C_k(self) -> float:
        k = self.k
        return k ** 3 * 2 ** k * (k * k + 1) ** (1.0 / (k * k))

    @property
    def alpha_k(self) -> float:
        return 1.0 / (self.k * self.k)

    @property
    def log_C_k(self) -> float:
        k = self.k
        return 3 * math.log(k) + k * math.log(2) + math.log(k * k + 1) / (k * k)

    def as_dict(self) -> dict:
        return {"k": self.k, "l_M": self.l_M, "r0": self.r0, "C_k": self.C_k, "alpha_k": self.alpha_k}


def _flow_matrix(u, k: int) -> np.ndarray:
    if u is None:
        return np.zeros((k, k))
    if isinstance(u, AlgebraVector):
        return ad(u)
    N = np.asarray(u, float)
    if N.shape != (k, k):
        raise PreconditionViolation(f"flow generator must be {k}x{k}, got {N.shape}")
    return N


def _flow_arg(u, k: int):
    """What covolume_flow_function expects: the vector itself or an exact-friendly matrix."""
    if isinstance(u, AlgebraVector):
        return u
    if u is None:
        return [[0] * k for _ in range(k)]
    return np.asarray(u)


# -- rho -------------------------------------------------------------------------

@dataclass(frozen=True)
class RhoResult:
    rho: float
    unclamped: float                     # inf when no subgroup falls below the cap at the anchor
    attaining_subgroup: LatticeBasis | None
    cutoff: dict                         # rank -> covolume cutoff used at the anchor time
    anchor: float
    n_candidates: int


def rho(lattice: LatticeBasis, u, B: tuple[float, float], constants: KMConstants | None = None, *,
        budget: int = MAX_ENUMERATION) -> RhoResult:
    """``min(1/k, inf_Delta sup_{t in B} ||h_t Delta||^(1/rank))`` over primitive ``Delta``.

    Since ``sup_B ||h_t Delta|| >= ||h_c Delta||`` for the anchor ``c`` (the
    midpoint of ``B``), only subgroups with ``||h_c Delta||^(1/rank)`` below
    the best value found so far can lower the infimum.  Ranks are processed
    in turn with that shrinking cutoff, starting from the cap ``1/k``.
    """
    k = lattice.ambient_dim
    constants = constants or KMConstants(k)
    lo, hi = float(B[0]), float(B[1])
    cap = 1.0 / k
    N = _flow_matrix(u, k)
    c = 0.5 * (lo + hi)
    h_c = scipy.linalg.expm(c * N)
    moved = lattice.transformed(h_c)
    best, arg = math.inf, None
    flow = _flow_arg(u, k)
    # prefixes of a reduced basis at the anchor are primitive and give a cheap first bound
    _, U = lll_reduce(moved.euclidean())
    for r in range(1, lattice.rank + 1):
        sub = lattice.sub([list(map(int, row)) for row in U[:r]])
        val = covolume_flow_function(flow, sub).sup(lo, hi) ** (1.0 / r)
        if val < best:
            best, arg = val, sub
    cutoff, n_cand = {}, 0
    for r in range(1, lattice.rank + 1):
        cutoff[r] = min(cap, best) ** r
        candidates = primitive_subgroups_below(moved, {r: cutoff[r]}, budget=budget - n_cand)
        n_cand += len(candidates)
        for sub_moved in candidates:
            if covolume(sub_moved) ** (1.0 / r) >= best:
                break       # sorted by covolume: nothing further can improve
            coeffs = np.linalg.lstsq(moved.vectors.T, sub_moved.vectors.T, rcond=None)[0].T
            sub = lattice.sub(np.rint(coeffs).astype(int).tolist())
            val = covolume_flow_function(flow, sub).sup(lo, hi) ** (1.0 / r)
            if val < best:
                best, arg = val, sub
    if best >= cap:
        best, arg = math.inf, None
    return RhoResult(min(cap, best), best, arg, cutoff, c, n_cand)


# -- small d1 --------------------------------------------------------------------------

def _euclidean_generator(N: np.ndarray, G: np.ndarray) -> np.ndarray:
    """``N`` written in orthonormal row coordinates (``G = L L^T``)."""
    L = np.linalg.cholesky(G)
    return np.linalg.solve(L, N.T @ L)


def _series_op_bound(Ne: np.ndarray, w: float) -> float:
    """Upper bound for ``max_{|s| <= w} ||exp(s Ne)||``."""
    total, P, fact = 1.0, np.eye(Ne.shape[0]), 1.0
    for j in range(1, Ne.shape[0] + 1):
        P = P @ Ne
        fact *= j
        n = np.linalg.norm(P, 2)
        if n == 0:
            break
        total += w ** j * n / fact
    return total


def measure_small_d1(lattice: LatticeBasis, u, B: tuple[float, float], eps: float, *,
                     budget: int = MAX_ENUMERATION) -> tuple[float, IntervalUnion]:
    """Exact ``m{t in B : d_1(h_t Lambda) < eps}`` and the set itself.

    ``B`` is cut into pieces of half-width ``w``.  If ``||h_t v|| < eps`` at
    some ``t`` in a piece with centre ``c``, then
    ``||h_c v|| <= max_{|s|<=w} ||h_s|| * eps``, so the candidates on a piece
    are the short vectors of ``h_c Lambda`` below that radius; each
    contributes the sublevel set of the polynomial ``||h_t v||^2``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    lo, hi = float(B[0]), float(B[1])
    if not hi > lo:
        return 0.0, IntervalUnion.empty()
    k = lattice.ambient_dim
    N = _flow_matrix(u, k)
    G = lattice.gram
    Ne = _euclidean_generator(N, G)
    nrm = float(np.linalg.norm(Ne, 2))
    half = 0.5 * (hi - lo) if nrm == 0 else min(0.5 * (hi - lo), 0.5 / nrm)
    n_pieces = max(1, math.ceil((hi - lo) / (2 * half) - 1e-12))
    edges = np.linspace(lo, hi, n_pieces + 1)
    parts: list[IntervalUnion] = []
    remaining = budget
    for a, b in zip(edges[:-1], edges[1:]):
        c = 0.5 * (a + b)
        radius = eps * _series_op_bound(Ne, 0.5 * (b - a))
        moved = lattice.transformed(scipy.linalg.expm(c * N))
        try:
            cands = short_vectors(moved, radius, strict=False, budget=remaining)
        except BudgetExceeded as exc:
            partial = IntervalUnion.union_all(parts + _sublevels(lattice, N, exc.partial or [], a, b, eps))
            raise BudgetExceeded(
                "candidate enumeration exceeded the budget; partial set is a lower bound",
                partial=partial,
            ) from exc
        remaining -= len(cands)
        parts.extend(_sublevels(lattice, N, cands, a, b, eps))
    out = IntervalUnion.union_all(parts)
    return out.measure, out


def _sublevels(lattice, N, cands, a, b, eps) -> list[IntervalUnion]:
    out = []
    for coeff, _ in cands:
        x = np.asarray(coeff, float) @ lattice.vectors
        P = flow_coefficients(N, x) if np.any(N) else x[:, None]
        q = quadratic_form_polynomial(P, lattice.gram)
        s = sublevel_set(q, a, b, eps * eps)
        if s:
            out.append(s)
    return out


# -- the bound --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    measured: float
    bound: float
    constants: dict
    witness: IntervalUnion = field(default_factory=IntervalUnion.empty)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.measured <= self.bound * (1 + TOL.bound_slack)


def check_km_bound(lattice: LatticeBasis, u, B: tuple[float, float], eps: float,
                   constants: KMConstants | None = None, *, rho_result: RhoResult | None = None,
                   budget: int = MAX_ENUMERATION) -> BoundReport:
    """Compare ``m{t in B : d_1(h_t Lambda) < eps}`` with ``C_k (eps/rho)^alpha_k m(B)``."""
    constants = constants or KMConstants(lattice.ambient_dim)
    if constants.k != lattice.ambient_dim:
        raise PreconditionViolation("constants were built for a different ambient dimension")
    r = rho_result or rho(lattice, u, B, constants, budget=budget)
    if not 0 < eps < r.rho:
        raise PreconditionViolation(f"need 0 < eps < rho = {r.rho:.6g}, got eps = {eps:.6g}")
    measured, witness = measure_small_d1(lattice, u, B, eps, budget=budget)
    bound = constants.C_k * (eps / r.rho) ** constants.alpha_k * (B[1] - B[0])
    return BoundReport(measured, bound, constants.as_dict(), witness,
                       {"rho": r.rho, "eps": eps, "interval": tuple(B)})


# -- explicit constants -------------------------------------------------------------------

def log_c_epsilon(eps: float, constants: KMConstants) -> float:
    """Natural log of ``(eps / C_k)^(k^2) / (8 l_M)``."""
    k = constants.k
    return k * k * (math.log(eps) - constants.log_C_k) - math.log(8 * constants.l_M)


def c_epsilon(eps: float, constants: KMConstants) -> float:
    """``(eps / C_k)^(k^2) / (8 l_M)``; may underflow to 0 for large ``k``."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    return math.exp(log_c_epsilon(eps, constants))


def log_c_epsilon_product(eps: float, constants: KMConstants, n_factors: int) -> float:
    """Log of the product-group constant ``c_bar_{eps / (2(2^n - 1))}^n``."""
    if n_factors < 1:
        raise ValueError("need at least one factor")
    return n_factors * log_c_epsilon(eps / (2 * (2 ** n_factors - 1)), constants)


def c_epsilon_product(eps: float, constants: KMConstants, n_factors: int) -> float:
    return math.exp(log_c_epsilon_product(eps, constants, n_factors))


def beta_uniform(eps: float, constants: KMConstants) -> mpmath.mpf:
    """``max{2^(k^2+4) C_k^(2k^2) / eps^(k^2), 2^(k^2+3) C_k^(2k^2) / eps^(2k^2)}``."""
    k2 = constants.k ** 2
    C = mpmath.mpf(constants.k) ** 3 * mpmath.mpf(2) ** constants.k * mpmath.mpf(k2 + 1) ** (mpmath.mpf(1) / k2)
    e = mpmath.mpf(eps)
    a = mpmath.mpf(2) ** (k2 + 4) * C ** (2 * k2) / e ** k2
    b = mpmath.mpf(2) ** (k2 + 3) * C ** (2 * k2) / e ** (2 * k2)
    return max(a, b)


def beta_product(eps: float, constants: KMConstants, n_factors: int) -> mpmath.mpf:
    """``max{16 C_k^(2k^2) / (l_M c), (8 C_k^(k^2) / (l_M c))^2}`` with ``c = c_{eps/2}``.

    ``c`` is the product-group constant for ``n_factors >= 2`` and the
    single-group one otherwise.
    """
    k2 = constants.k ** 2
    C = mpmath.mpf(constants.k) ** 3 * mpmath.mpf(2) ** constants.k * mpmath.mpf(k2 + 1) ** (mpmath.mpf(1) / k2)
    if n_factors >= 2:
        logc = log_c_epsilon_product(eps / 2, constants, n_factors)
    else:
        logc = log_c_epsilon(eps / 2, constants)
    c = mpmath.exp(logc)
    lM = constants.l_M
    a = 16 * C ** (2 * k2) / (lM * c)
    b = (8 * C ** k2 / (lM * c)) ** 2
    return max(a, b)


# -- invariant sublattices -----------------------------------------------------------------

@dataclass(frozen=True)
class DetectionResult:
    found: bool
    subgroup: LatticeBasis | None = None
    covolume: float | None = None
    n_searched: int = 0


def detect_invariant_sublattice(lattice: LatticeBasis, u, threshold: float, *,
                                max_rank: int | None = None,
                                budget: int = MAX_ENUMERATION) -> DetectionResult:
    """First primitive ``Delta`` (by rank, then covolume) with constant flow covolume below ``threshold^rank``.

    A constant covolume equals its value at ``t = 0``, so enumerating
    subgroups with ``||Delta|| < threshold^rank`` is complete.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    k = lattice.ambient_dim
    top = lattice.rank if max_rank is None else min(max_rank, lattice.rank)
    cutoff = {r: threshold ** r for r in range(1, top + 1)}
    cands = primitive_subgroups_below(lattice, cutoff, budget=budget)
    flow = _flow_arg(u, k)
    for i, sub in enumerate(cands):
        val = constancy_test(covolume_flow_function(flow, sub))
        if val is not None and val < threshold ** sub.rank:
            return DetectionResult(True, sub, val, i + 1)
    return DetectionResult(False, None, None, len(cands))


def min_covolume_root(lattice: LatticeBasis) -> float:
    """``min(||Delta||^(1/rank))`` over primitive subgroups, for scaling checks."""
    cap = covolume(lattice) ** (1.0 / lattice.rank)
    subs = primitive_subgroups_below(lattice, {r: cap ** r * (1 + 1e-9) for r in range(1, lattice.rank + 1)})
    return min((covolume(s) ** (1.0 / s.rank) for s in subs), default=cap)
