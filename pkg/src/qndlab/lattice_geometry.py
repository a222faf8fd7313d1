"""Discrete subgroups of R^k: covolumes, short vectors, primitive subgroups.

A :class:`LatticeBasis` holds its generators as rows in some coordinate
system together with the Gram matrix of that system's inner product (the
identity for plain Euclidean space, the Killing-derived form for Lie algebra
coordinates).  :meth:`LatticeBasis.euclidean` maps to orthonormal
coordinates; everything metric goes through it.

Integer linear algebra (echelon forms, saturation, unimodular completion) is
done exactly on Python integers and ``Fraction``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, gcd
from typing import Iterator, Sequence

import numpy as np

from .config import MAX_BOX_CANDIDATES, MAX_ENUMERATION, TOL
from .errors import BoxTooLarge, BudgetExceeded, DegenerateBasis, IndiscreteSpan, PreconditionViolation

# gamma_r^r: Hermite constants to the power r, known exactly for r <= 8
HERMITE_POW = {1: 1.0, 2: 4 / 3, 3: 2.0, 4: 4.0, 5: 8.0, 6: 64 / 3, 7: 64.0, 8: 256.0}


def hermite_constant(r: int) -> float:
    if r in HERMITE_POW:
        return HERMITE_POW[r] ** (1.0 / r)
    # Minkowski's bound gamma_r <= 1 + r/4 is enough for completeness
    return 1.0 + r / 4.0


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Rows of ``vectors`` generate the lattice; ``gram`` is the ambient form."""

    vectors: np.ndarray
    gram: np.ndarray | None = None
    exact: tuple | None = None
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if V.size == 0:
            V = V.reshape(0, V.shape[-1] if V.ndim == 2 else 0)
        object.__setattr__(self, "vectors", V)
        k = V.shape[1]
        G = np.eye(k) if self.gram is None else np.asarray(self.gram, dtype=float)
        object.__setattr__(self, "gram", G)
        object.__setattr__(self, "_chol", np.linalg.cholesky(G))
        if V.shape[0] > k:
            raise DegenerateBasis(f"{V.shape[0]} vectors in dimension {k}")

    @classmethod
    def from_exact(cls, rows: Sequence[Sequence], gram=None) -> "LatticeBasis":
        ex = tuple(tuple(Fraction(x) for x in r) for r in rows)
        return cls(np.array([[float(x) for x in r] for r in ex]), gram=gram, exact=ex)

    @classmethod
    def standard(cls, k: int) -> "LatticeBasis":
        return cls.from_exact([[1 if i == j else 0 for j in range(k)] for i in range(k)])

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[1]

    def euclidean(self) -> np.ndarray:
        """Rows in orthonormal coordinates (``G = L L^T``, rows ``v L``)."""
        return self.vectors @ self._chol

    def gram_matrix(self) -> np.ndarray:
        return self.vectors @ self.gram @ self.vectors.T

    def norms(self, coeffs: np.ndarray | None = None) -> np.ndarray:
        W = self.euclidean() if coeffs is None else np.asarray(coeffs, float) @ self.euclidean()
        return np.linalg.norm(W, axis=-1)

    def scaled(self, c: float) -> "LatticeBasis":
        return LatticeBasis(c * self.vectors, gram=self.gram)

    def transformed(self, M: np.ndarray) -> "LatticeBasis":
        """Image under the linear map ``M`` acting on coordinate columns."""
        return LatticeBasis(self.vectors @ np.asarray(M, float).T, gram=self.gram)

    def sub(self, coeffs: Sequence[Sequence[int]]) -> "LatticeBasis":
        """Sublattice with generators given by integer coefficient rows."""
        C = [[int(c) for c in row] for row in coeffs]
        vec = np.array(C, dtype=float).reshape(len(C), self.rank) @ self.vectors
        ex = None
        if self.exact is not None:
            ex = tuple(
                tuple(sum((c * self.exact[i][j] for i, c in enumerate(row)), Fraction(0))
                      for j in range(self.ambient_dim))
                for row in C
            )
        return LatticeBasis(vec, gram=self.gram, exact=ex)

    def check_independent(self):
        G = self.gram_matrix()
        if self.rank == 0:
            return
        w = np.linalg.eigvalsh(G)
        if w.min() <= TOL.dependence * max(1.0, w.max()):
            raise DegenerateBasis("basis vectors are linearly dependent")


# -- covolume ----------------------------------------------------------------

def covolume(b: LatticeBasis) -> float:
    """``sqrt(det(V G V^T))``, the norm of ``v_1 ^ ... ^ v_m``."""
    if b.rank == 0:
        return 1.0
    b.check_independent()
    d = np.linalg.det(b.gram_matrix())
    return float(np.sqrt(max(d, 0.0)))


def wedge_coordinates(W: np.ndarray) -> np.ndarray:
    """Plucker coordinates (all maximal minors) of the rows of ``W``."""
    m, k = W.shape
    return np.array([np.linalg.det(W[:, list(S)]) for S in itertools.combinations(range(k), m)])


def wedge_norm(b: LatticeBasis) -> float:
    """Covolume via Plucker coordinates (Cauchy-Binet cross-check)."""
    if b.rank == 0:
        return 1.0
    return float(np.linalg.norm(wedge_coordinates(b.euclidean())))


# -- reduction and enumeration --------------------------------------------------

def lll_reduce(B: np.ndarray, delta: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
    """LLL on the rows of ``B`` (Euclidean).  Returns ``(reduced, U)``, ``reduced = U B``."""
    B = np.array(B, dtype=float)
    n = B.shape[0]
    U = np.array([[1 if i == j else 0 for j in range(n)] for i in range(n)], dtype=object)

    def gso(B):
        Q = np.zeros_like(B)
        mu = np.zeros((n, n))
        for i in range(n):
            v = B[i].copy()
            for j in range(i):
                d = Q[j] @ Q[j]
                mu[i, j] = (B[i] @ Q[j]) / d if d > 0 else 0.0
                v -= mu[i, j] * Q[j]
            Q[i] = v
        return Q, mu

    Q, mu = gso(B)
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            break
        for j in range(k - 1, -1, -1):
            q = int(round(mu[k, j]))
            if q:
                B[k] -= q * B[j]
                U[k] = U[k] - q * U[j]
                Q, mu = gso(B)
        if Q[k] @ Q[k] >= (delta - mu[k, k - 1] ** 2) * (Q[k - 1] @ Q[k - 1]):
            k += 1
        else:
            B[[k, k - 1]] = B[[k - 1, k]]
            U[[k, k - 1]] = U[[k - 1, k]]
            Q, mu = gso(B)
            k = max(k - 1, 1)
    return B, U


def short_vectors(b: LatticeBasis, radius: float, *, strict: bool = True,
                  budget: int = MAX_ENUMERATION) -> list[tuple[tuple[int, ...], float]]:
    """All nonzero lattice vectors of norm ``< radius`` (``<=`` if not strict).

    Fincke-Pohst enumeration on the Cholesky factor of the lattice Gram
    matrix.  Returns ``(coefficients, norm)`` pairs with one representative
    per ``+-`` pair (first nonzero coefficient positive).
    """
    m = b.rank
    if m == 0 or radius <= 0:
        return []
    G = b.gram_matrix()
    # upper-triangular R with G = R^T R, enumerate from the last coordinate
    try:
        R = np.linalg.cholesky(G).T
    except np.linalg.LinAlgError as exc:
        raise DegenerateBasis("lattice Gram matrix is not positive definite") from exc
    r2 = radius * radius * (1 + 1e-12)
    out: list[tuple[tuple[int, ...], float]] = []
    x = [0] * m
    count = 0

    def rec(i: int, remaining: float):
        nonlocal count
        # centre from already fixed coordinates i+1..m-1
        s = sum(R[i, j] * x[j] for j in range(i + 1, m))
        c = -s / R[i, i]
        half = np.sqrt(max(remaining, 0.0)) / abs(R[i, i])
        lo, hi = ceil(c - half - 1e-12), int(np.floor(c + half + 1e-12))
        for xi in range(lo, hi + 1):
            count += 1
            if count > budget:
                raise BudgetExceeded(f"short vector enumeration exceeded {budget} nodes", partial=out)
            x[i] = xi
            part = (R[i, i] * xi + s) ** 2
            rem = remaining - part
            if rem < -1e-12 * r2:
                continue
            if i == 0:
                if any(x):
                    first = next(v for v in x if v)
                    if first > 0:
                        coeff = np.array(x, float)
                        n = float(np.sqrt(max(coeff @ G @ coeff, 0.0)))
                        if n < radius or (not strict and n <= radius * (1 + 1e-12)):
                            out.append((tuple(x), n))
            else:
                rec(i - 1, rem)
        x[i] = 0

    rec(m - 1, r2)
    out.sort(key=lambda p: p[1])
    return out


def shortest_vector_d1(b: LatticeBasis) -> tuple[float, np.ndarray]:
    """``d_1`` and a minimiser, by exhaustive coefficient-box enumeration.

    After LLL, the first reduced vector bounds ``d_1``; any minimiser has
    coefficients (in the reduced basis) of size at most
    ``||b_1|| / sqrt(lambda_min)`` where ``lambda_min`` is the smallest
    eigenvalue of the reduced Gram matrix.
    """
    m = b.rank
    if m == 0:
        raise DegenerateBasis("zero lattice has no shortest vector")
    if m > 8:
        raise PreconditionViolation("exhaustive shortest vector search is limited to rank 8")
    b.check_independent()
    W = b.euclidean()
    R, U = lll_reduce(W)
    G = R @ R.T
    lam = float(np.linalg.eigvalsh(G).min())
    b1 = float(np.linalg.norm(R[0]))
    rad = int(ceil(b1 / np.sqrt(lam) - 1e-12))
    size = (2 * rad + 1) ** m
    if size > MAX_BOX_CANDIDATES:
        raise BoxTooLarge(f"coefficient box has {size} points")
    best, arg = b1, np.array([1] + [0] * (m - 1))
    rng = np.arange(-rad, rad + 1)
    # chunk over the first coordinate to bound memory
    combos = list(itertools.product(rng, repeat=m - 1))
    rest = np.array(combos, dtype=float).reshape(len(combos), m - 1)
    for a in rng:
        C = np.concatenate([np.full((rest.shape[0], 1), a, float), rest], axis=1)
        vals = np.einsum("ij,jk,ik->i", C, G, C)
        vals[~np.any(C != 0, axis=1)] = np.inf
        i = int(np.argmin(vals))
        if vals[i] < best * best * (1 - 1e-15):
            best, arg = float(np.sqrt(vals[i])), C[i].astype(int)
    coeff = np.array([int(c) for c in arg], dtype=object) @ U
    vec = np.asarray(coeff, dtype=float) @ b.vectors
    return float(np.linalg.norm(vec @ b._chol)), vec


@dataclass(frozen=True)
class D1Report:
    d1: float
    bound: float
    rank: int
    covolume: float
    passed: bool


def check_d1_covolume_bound(b: LatticeBasis) -> D1Report:
    d1, _ = shortest_vector_d1(b)
    cov = covolume(b)
    bound = 4.0 * cov ** (1.0 / b.rank)
    return D1Report(d1, bound, b.rank, cov, d1 <= bound * (1 + TOL.bound_slack))


# -- exact integer linear algebra -----------------------------------------------

def _as_fraction_rows(b: LatticeBasis) -> list[list[Fraction]]:
    if b.exact is not None:
        return [list(r) for r in b.exact]
    return [[Fraction(float(x)).limit_denominator(10 ** 9) for x in r] for r in b.vectors]


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[tuple[Fraction, ...], ...]:
    """Reduced row echelon form over Q, zero rows dropped (a span invariant)."""
    M = [list(map(Fraction, r)) for r in rows]
    if not M:
        return ()
    n = len(M[0])
    piv_row = 0
    for col in range(n):
        p = next((i for i in range(piv_row, len(M)) if M[i][col] != 0), None)
        if p is None:
            continue
        M[piv_row], M[p] = M[p], M[piv_row]
        pv = M[piv_row][col]
        M[piv_row] = [x / pv for x in M[piv_row]]
        for i in range(len(M)):
            if i != piv_row and M[i][col] != 0:
                f = M[i][col]
                M[i] = [a - f * c for a, c in zip(M[i], M[piv_row])]
        piv_row += 1
        if piv_row == len(M):
            break
    return tuple(tuple(r) for r in M[:piv_row])


def integer_column_echelon(A: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], int]:
    """Column-style echelon of an integer matrix ``A`` (rows = vectors).

    Integer column operations reduce ``A`` to ``A V`` with a lower-triangular
    shape whose first ``r`` columns are nonzero.  Returns ``(A V, W, r)`` where
    ``W = V^{-1}`` (tracked directly).  The first ``r`` rows of ``W`` form a
    basis of the saturation of the row space of ``A`` in ``Z^n``.
    """
    M = [list(map(int, r)) for r in A]
    m = len(M)
    n = len(M[0]) if m else 0
    W = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    r = 0
    for row in range(m):
        if r == n:
            break
        while True:
            nz = [j for j in range(r, n) if M[row][j] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda j: abs(M[row][j]))
            if piv != r:
                for R_ in M:
                    R_[r], R_[piv] = R_[piv], R_[r]
                W[r], W[piv] = W[piv], W[r]
            done = True
            for j in range(r + 1, n):
                q = M[row][j] // M[row][r]
                if q:
                    # col_j -= q col_r  <=>  row_r of W += q row_j
                    for R_ in M:
                        R_[j] -= q * R_[r]
                    W[r] = [a + q * b for a, b in zip(W[r], W[j])]
                if M[row][j] != 0:
                    done = False
            if done:
                break
        if any(M[row][j] != 0 for j in range(r, n)):
            if M[row][r] < 0:
                for R_ in M:
                    R_[r] = -R_[r]
                W[r] = [-a for a in W[r]]
            r += 1
    return M, W, r


def saturate_integer(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of ``span_Q(rows) cap Z^n``."""
    _, W, r = integer_column_echelon(rows)
    return [list(w) for w in W[:r]]


def complete_to_unimodular(v: Sequence[int]) -> list[list[int]]:
    """Unimodular integer matrix whose first row is the primitive vector ``v``."""
    v = [int(x) for x in v]
    g = 0
    for x in v:
        g = gcd(g, x)
    if g != 1:
        raise PreconditionViolation(f"{v} is not primitive")
    _, W, r = integer_column_echelon([v])
    # A V = (1, 0, ..., 0), so v = e_1 W: the first row of W is v
    assert W[0] == v
    return W


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row Hermite normal form of the integer row module (zero rows dropped)."""
    M = [list(map(int, r)) for r in rows if any(r)]
    if not M:
        return []
    n = len(M[0])
    top = 0
    for col in range(n):
        if top == len(M):
            break
        while True:
            nz = [i for i in range(top, len(M)) if M[i][col] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(M[i][col]))
            M[top], M[p] = M[p], M[top]
            for i in range(top + 1, len(M)):
                q = M[i][col] // M[top][col]
                if q:
                    M[i] = [a - q * b for a, b in zip(M[i], M[top])]
            if all(M[i][col] == 0 for i in range(top + 1, len(M))):
                break
        if M[top][col] == 0:
            continue
        if M[top][col] < 0:
            M[top] = [-a for a in M[top]]
        for i in range(top):
            q = M[i][col] // M[top][col]
            if q:
                M[i] = [a - q * b for a, b in zip(M[i], M[top])]
        top += 1
    return [r for r in M[:top] if any(r)]


def saturate(span_basis: LatticeBasis, ambient: LatticeBasis) -> LatticeBasis:
    """Basis of ``span_R(span_basis) cap ambient``."""
    A = _as_fraction_rows(ambient)
    S = _as_fraction_rows(span_basis)
    # coefficients of each spanning vector in the ambient basis
    coeffs = []
    for s in S:
        c = _solve_exact(A, s)
        if c is None or any(x.denominator != 1 for x in c):
            raise PreconditionViolation("span vector is not in the ambient lattice")
        coeffs.append([int(x) for x in c])
    sat = saturate_integer(coeffs)
    return ambient.sub(sat)


def _solve_exact(A: list[list[Fraction]], v: list[Fraction]) -> list[Fraction] | None:
    """Solve ``c A = v`` (rows of ``A`` independent) over Q."""
    m = len(A)
    n = len(v)
    # augmented system A^T c = v
    M = [[A[i][j] for i in range(m)] + [v[j]] for j in range(n)]
    piv_cols = []
    row = 0
    for col in range(m):
        p = next((i for i in range(row, n) if M[i][col] != 0), None)
        if p is None:
            return None
        M[row], M[p] = M[p], M[row]
        pv = M[row][col]
        M[row] = [x / pv for x in M[row]]
        for i in range(n):
            if i != row and M[i][col] != 0:
                f = M[i][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[row])]
        piv_cols.append(col)
        row += 1
    if any(M[i][m] != 0 for i in range(row, n)):
        return None
    return [M[i][m] for i in range(m)]


# -- primitive subgroups ------------------------------------------------------------

def _primitive(c: Sequence[int]) -> bool:
    g = 0
    for x in c:
        g = gcd(g, int(x))
    return g == 1


def _enumerate(G: np.ndarray, limits: dict[int, float], budget: list[int]) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Primitive subgroups of the lattice with Gram ``G`` and covolume below ``limits[r]``.

    Yields tuples of integer coefficient rows (in the current basis).

    A rank ``r`` primitive subgroup ``D`` with covolume ``< c`` contains a
    primitive vector ``v`` of norm at most ``sqrt(gamma_r) c^(1/r)``
    (Hermite).  ``v`` is primitive in the whole lattice, so it extends to a
    basis ``v, w_2, ...``; projecting orthogonally to ``v`` maps ``D`` onto a
    rank ``r-1`` primitive subgroup of the projected lattice with covolume
    ``< c / ||v||``.  Recursing covers every ``D``; duplicates are removed by
    the caller.
    """
    m = G.shape[0]
    b = LatticeBasis(np.linalg.cholesky(G))  # rows realise the Gram matrix G
    for r, c in sorted(limits.items()):
        if r == 1:
            for coeff, n in short_vectors(b, c, budget=budget[0]):
                budget[0] -= 1
                if budget[0] < 0:
                    raise BudgetExceeded("primitive subgroup enumeration budget exhausted")
                if _primitive(coeff):
                    yield (coeff,)
        elif r == m:
            if np.sqrt(max(np.linalg.det(G), 0.0)) < c:
                yield tuple(tuple(1 if i == j else 0 for j in range(m)) for i in range(m))
        elif r < m:
            cut = hermite_constant(r) ** 0.5 * c ** (1.0 / r)
            for v, n in short_vectors(b, cut, strict=False, budget=budget[0]):
                budget[0] -= 1
                if budget[0] < 0:
                    raise BudgetExceeded("primitive subgroup enumeration budget exhausted")
                if not _primitive(v):
                    continue
                U = complete_to_unimodular(v)
                Uf = np.array(U, dtype=float)
                G2 = Uf @ G @ Uf.T
                # project rows 2.. orthogonally to row 1
                g11 = G2[0, 0]
                P = G2[1:, 1:] - np.outer(G2[1:, 0], G2[0, 1:]) / g11
                P = 0.5 * (P + P.T)
                for sub in _enumerate(P, {r - 1: c / n}, budget):
                    rows = [list(U[0])]
                    for s in sub:
                        rows.append([sum(s[i] * U[i + 1][j] for i in range(m - 1)) for j in range(m)])
                    yield tuple(tuple(x) for x in rows)


def primitive_subgroups_below(b: LatticeBasis, C: float | dict[int, float], *,
                              budget: int = MAX_ENUMERATION) -> list[LatticeBasis]:
    """All primitive subgroups of ``b`` of covolume ``< C``.

    ``C`` may be a number (same cutoff for every rank) or a ``{rank: cutoff}``
    mapping.  Results are ordered by rank, then covolume.
    """
    if not isinstance(C, dict):
        if not np.isfinite(C):
            raise PreconditionViolation("covolume cutoff must be finite")
        C = {r: float(C) for r in range(1, b.rank + 1)}
    b.check_independent()
    G = b.gram_matrix()
    found: dict[tuple, tuple[int, tuple]] = {}
    counter = [budget]
    for rows in _enumerate(G, {r: c for r, c in C.items() if c > 0}, counter):
        sat = saturate_integer(rows)
        if len(sat) != len(rows):
            continue
        key = rref([[Fraction(x) for x in r] for r in rows])
        if key not in found:
            found[key] = (len(rows), tuple(tuple(r) for r in sat))
    out = []
    for rank, rows in found.values():
        sub = b.sub(rows)
        cov = covolume(sub)
        if cov < C.get(rank, 0.0):
            out.append((rank, cov, sub))
    out.sort(key=lambda t: (t[0], t[1]))
    return [s for _, _, s in out]


def generates_saturation(rows: Sequence[Sequence[int]]) -> bool:
    """True if the integer rows span a primitive subgroup of ``Z^n``."""
    return hermite_normal_form(rows) == hermite_normal_form(saturate_integer(rows))


# -- Z-spans of real vectors ------------------------------------------------------

def integer_span(V: np.ndarray, gram: np.ndarray | None = None) -> np.ndarray:
    """Basis (rows) of the Z-module generated by the rows of ``V``.

    Pairwise size reduction is iterated to a fixpoint, tracking integer
    coefficients; vectors reduced to zero are dropped.  If the sweep stalls
    with dependent vectors left, coefficients are rationalised relative to
    an independent subset and an integer Hermite form finishes the job.
    Every input is checked to be an integer combination of the output.
    """
    V = np.atleast_2d(np.asarray(V, float))
    n, k = V.shape
    G = np.eye(k) if gram is None else np.asarray(gram, float)
    scale = max(1.0, float(np.sqrt(np.max(np.einsum("ij,jk,ik->i", V, G, V)))))
    vecs = [V[i].copy() for i in range(n)]
    coefs = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def nsq(v):
        return float(v @ G @ v)

    changed = True
    sweeps = 0
    while changed and sweeps < 10000:
        sweeps += 1
        changed = False
        order = sorted(range(len(vecs)), key=lambda i: nsq(vecs[i]))
        vecs = [vecs[i] for i in order]
        coefs = [coefs[i] for i in order]
        keep = []
        for i, v in enumerate(vecs):
            if np.sqrt(max(nsq(v), 0.0)) <= TOL.dependence * scale:
                if max(abs(c) for c in coefs[i]) > 10 ** 6:
                    raise IndiscreteSpan("reduction produced a tiny vector with huge coefficients")
                changed = True
                continue
            keep.append(i)
        vecs = [vecs[i] for i in keep]
        coefs = [coefs[i] for i in keep]
        for i in range(len(vecs)):
            for j in range(len(vecs)):
                if i == j:
                    continue
                d = nsq(vecs[j])
                if d <= (TOL.dependence * scale) ** 2:
                    continue
                mu = (vecs[i] @ G @ vecs[j]) / d
                q = int(np.rint(mu))
                if q == 0:
                    continue
                new = vecs[i] - q * vecs[j]
                if nsq(new) < nsq(vecs[i]) * (1 - 1e-12):
                    vecs[i] = new
                    coefs[i] = [a - q * b for a, b in zip(coefs[i], coefs[j])]
                    changed = True
    B = np.array(vecs).reshape(-1, k)
    if B.shape[0] and np.linalg.matrix_rank(B @ np.linalg.cholesky(G), tol=TOL.dependence * scale) < B.shape[0]:
        B = _rational_span(B, G, scale)
    _check_span(V, B, G)
    return B


def _rational_span(B: np.ndarray, G: np.ndarray, scale: float) -> np.ndarray:
    L = np.linalg.cholesky(G)
    W = B @ L
    # greedy independent subset
    idx: list[int] = []
    for i in range(W.shape[0]):
        trial = W[idx + [i]]
        if np.linalg.matrix_rank(trial, tol=TOL.dependence * scale) == len(idx) + 1:
            idx.append(i)
    base = W[idx]
    sol, *_ = np.linalg.lstsq(base.T, W.T, rcond=None)
    Q = [[Fraction(float(x)).limit_denominator(10 ** 6) for x in col] for col in sol.T]
    resid = np.abs(np.array([[float(x) for x in r] for r in Q]) @ base - W).max()
    if resid > TOL.zspan_residual * scale:
        raise IndiscreteSpan(f"vectors do not generate a discrete group (residual {resid:.3g})")
    den = 1
    for r in Q:
        for x in r:
            den = den * x.denominator // gcd(den, x.denominator)
    Zrows = [[int(x * den) for x in r] for r in Q]
    H = hermite_normal_form(Zrows)
    if max((abs(x) for r in H for x in r), default=0) > 10 ** 12:
        raise IndiscreteSpan("rational reconstruction produced huge coefficients")
    return (np.array(H, dtype=float) / den) @ B[idx]


def _check_span(V: np.ndarray, B: np.ndarray, G: np.ndarray):
    if B.shape[0] == 0:
        if np.abs(V).max() > 0:
            raise IndiscreteSpan("nonzero inputs reduced to an empty basis")
        return
    L = np.linalg.cholesky(G)
    sol, *_ = np.linalg.lstsq((B @ L).T, (V @ L).T, rcond=None)
    err = np.abs(sol - np.rint(sol)).max()
    recon = np.abs(np.rint(sol).T @ B - V).max()
    scale = max(1.0, float(np.abs(V).max()))
    if err > TOL.zspan_residual or recon > TOL.zspan_residual * scale:
        raise IndiscreteSpan(f"input not an integer combination of the span basis (residual {err:.3g})")


def express_integer(b: LatticeBasis, v: np.ndarray) -> tuple[np.ndarray, float]:
    """Nearest integer coefficients of ``v`` in ``b`` and the residual."""
    L = b._chol
    sol, *_ = np.linalg.lstsq((b.vectors @ L).T, np.asarray(v, float) @ L, rcond=None)
    z = np.rint(sol)
    return z.astype(int), float(np.abs(z @ b.vectors - v).max())
