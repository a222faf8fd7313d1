"""Concrete Lie algebras: sl(2,R), sl(2,C) as a real algebra, and products.

Structure constants, the Killing form and the inner product
``(x, y) = -B(x, theta y)`` are all generated from the defining matrices, so
nothing here is hand-entered beyond the basis itself.  Elements of the group
are plain numpy arrays in the block-diagonal defining representation (one
2x2 block per factor); exact discrete-group elements live in :mod:`qndlab.exact`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

import numpy as np
import scipy.linalg

from .config import TOL
from .errors import (NotNilpotent, ReexpansionError, SpecMismatch,
                     TwoStepViolation)

_H = np.array([[1, 0], [0, -1]], dtype=float)
_E = np.array([[0, 1], [0, 0]], dtype=float)
_F = np.array([[0, 0], [1, 0]], dtype=float)

FACTOR_KINDS = ("sl2r", "sl2c_real")
# B(X, Y) = scale * Re tr(XY) on each simple factor
_TRACE_SCALE = {"sl2r": 4.0, "sl2c_real": 8.0}
_DEFAULT_L_M = {"sl2r": 2, "sl2c_real": 4}


def _factor_basis(kind: str) -> list[np.ndarray]:
    if kind == "sl2r":
        return [_H, _E, _F]
    if kind == "sl2c_real":
        real = [m.astype(complex) for m in (_H, _E, _F)]
        return real + [1j * m for m in real]
    raise SpecMismatch(f"unknown algebra factor {kind!r}; expected one of {FACTOR_KINDS}")


@dataclass(frozen=True)
class RootData:
    """Coordinate index sets of one simple factor.

    ``u_minus``, ``z`` and ``u_plus`` partition the factor's coordinates;
    ``a`` and ``m`` split ``z``.  The ``2 alpha`` root spaces vanish for the
    sl2 families.
    """

    u_minus: tuple[int, ...]
    z: tuple[int, ...]
    u_plus: tuple[int, ...]
    a: tuple[int, ...]
    m: tuple[int, ...]

    def all_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.u_minus + self.z + self.u_plus))


def _factor_roots(kind: str, offset: int) -> RootData:
    o = offset
    if kind == "sl2r":
        return RootData((o + 2,), (o,), (o + 1,), (o,), ())
    return RootData((o + 2, o + 5), (o, o + 3), (o + 1, o + 4), (o,), (o + 3,))


def _block_diag(blocks: Sequence[np.ndarray], dtype) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=dtype)
    i = 0
    for b in blocks:
        d = b.shape[0]
        out[i:i + d, i:i + d] = b
        i += d
    return out


def _snap(A: np.ndarray) -> np.ndarray:
    """Round entries that are integers up to rounding error."""
    r = np.rint(A)
    return np.where(np.abs(A - r) < 1e-12, r, A)


def _realify(mats: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts of flattened matrices as real columns."""
    flat = mats.reshape(mats.shape[0], -1)
    return np.concatenate([flat.real, flat.imag], axis=1).T


@dataclass(eq=False)
class LieAlgebraSpec:
    """A real Lie algebra with a fixed basis of matrices.

    Use :func:`algebra` for the shipped families and :meth:`from_basis` for
    ad hoc (e.g. nilpotent) test algebras.
    """

    name: str
    basis: np.ndarray                      # (k, n, n)
    killing_gram: np.ndarray               # (k, k), inner product (x, y)
    factors: tuple[str, ...] = ()
    factor_slices: tuple[slice, ...] = ()
    root_data: tuple[RootData, ...] = ()
    structure_constants: np.ndarray = field(init=False)
    _coord_map: np.ndarray = field(init=False, repr=False)
    _coord_pinv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.basis = np.asarray(self.basis)
        A = _realify(self.basis)
        self._coord_map = A
        self._coord_pinv = np.linalg.pinv(A)
        k = self.dim
        c = np.zeros((k, k, k))
        for i in range(k):
            for j in range(k):
                X, Y = self.basis[i], self.basis[j]
                c[i, j] = self.coords_of(X @ Y - Y @ X)
        self.structure_constants = _snap(c)
        self.killing_gram = np.asarray(self.killing_gram, dtype=float)

    # -- construction ------------------------------------------------------
    @classmethod
    def from_basis(cls, name: str, basis: Sequence[np.ndarray], gram: np.ndarray) -> "LieAlgebraSpec":
        """Algebra spanned by ``basis`` with an explicit inner product."""
        spec = cls(name=name, basis=np.array(basis), killing_gram=np.asarray(gram, float))
        spec.factor_slices = (slice(0, spec.dim),)
        return spec

    # -- basic data --------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def matrix_size(self) -> int:
        return self.basis.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.basis)

    @property
    def n_factors(self) -> int:
        return len(self.factor_slices)

    @property
    def default_r0(self) -> float:
        return 0.1 / self.dim

    @property
    def default_l_M(self) -> int:
        out = 1
        for f in self.factors:
            out *= _DEFAULT_L_M[f]
        return out

    def vector(self, coords) -> "AlgebraVector":
        c = np.asarray(coords, dtype=float)
        if c.shape != (self.dim,):
            raise SpecMismatch(f"{self.name} has dimension {self.dim}, got coordinates of shape {c.shape}")
        return AlgebraVector(c, self)

    def zero(self) -> "AlgebraVector":
        return AlgebraVector(np.zeros(self.dim), self)

    def basis_vector(self, i: int) -> "AlgebraVector":
        c = np.zeros(self.dim)
        c[i] = 1.0
        return AlgebraVector(c, self)

    def named(self, label: str, factor: int = 0) -> "AlgebraVector":
        """Basis element by label (``H``, ``E``, ``F``, ``iH``, ``iE``, ``iF``)."""
        labels = {"H": 0, "E": 1, "F": 2, "iH": 3, "iE": 4, "iF": 5}
        if not self.factors or label not in labels:
            raise SpecMismatch(f"no basis element {label!r} in {self.name}")
        sl = self.factor_slices[factor]
        idx = labels[label]
        if idx >= sl.stop - sl.start:
            raise SpecMismatch(f"factor {factor} of {self.name} has no {label!r}")
        return self.basis_vector(sl.start + idx)

    # -- coordinates -------------------------------------------------------
    def matrix_of(self, coords: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(coords, float), self.basis, axes=(-1, 0))

    def coords_of(self, X: np.ndarray, *, check: bool = True) -> np.ndarray:
        """Coordinates of a matrix (or a stack of matrices) in the basis."""
        X = np.asarray(X)
        stacked = X.reshape((-1,) + X.shape[-2:])
        b = _realify(stacked)
        c = self._coord_pinv @ b
        if check:
            resid = np.abs(self._coord_map @ c - b).max(axis=0) if b.size else np.zeros(0)
            scale = np.maximum(1.0, np.abs(b).max(axis=0)) if b.size else np.zeros(0)
            if np.any(resid > TOL.reexpansion * scale):
                raise ReexpansionError(
                    f"matrix is not in the span of the {self.name} basis (residual {resid.max():.3g})"
                )
        c = c.T
        return c.reshape(X.shape[:-2] + (self.dim,))

    def from_matrix(self, X: np.ndarray) -> "AlgebraVector":
        return AlgebraVector(self.coords_of(X), self)

    # -- structure ---------------------------------------------------------
    def ad_matrix(self, coords: np.ndarray) -> np.ndarray:
        """Matrix of ``ad_x`` acting on coordinate columns."""
        return np.einsum("i,ijk->kj", np.asarray(coords, float), self.structure_constants)

    def killing_matrix(self) -> np.ndarray:
        """``B_ij = tr(ad_i ad_j)`` from the structure constants."""
        c = self.structure_constants
        return np.einsum("iab,jba->ij", c, c)

    def jacobi_residual(self) -> float:
        c = self.structure_constants
        # [[e_i,e_j],e_l] + cyclic, in coordinates
        t = np.einsum("ijm,mlr->ijlr", c, c)
        cyc = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
        return float(np.abs(cyc).max())

    def factor_of(self, index: int) -> int:
        for f, sl in enumerate(self.factor_slices):
            if sl.start <= index < sl.stop:
                return f
        raise IndexError(index)

    def block(self, X: np.ndarray, factor: int) -> np.ndarray:
        """The ``factor``-th 2x2 diagonal block of a group or algebra matrix."""
        i = 2 * factor
        return X[..., i:i + 2, i:i + 2]

    def trace_scale(self, factor: int) -> float:
        return _TRACE_SCALE[self.factors[factor]]

    def trace_kappa(self, factor: int) -> float:
        """Lower bound ``||y|| / |eigenvalue of y|`` on the factor."""
        return float(np.sqrt(2.0 * self.trace_scale(factor)))


def _build(kinds: tuple[str, ...]) -> LieAlgebraSpec:
    blocks = [_factor_basis(k) for k in kinds]
    cplx = any(k == "sl2c_real" for k in kinds)
    dtype = complex if cplx else float
    basis = []
    slices, roots = [], []
    offset = 0
    for f, fb in enumerate(blocks):
        for m in fb:
            parts = [np.zeros((2, 2), dtype=dtype) for _ in kinds]
            parts[f] = m.astype(dtype)
            basis.append(_block_diag(parts, dtype))
        slices.append(slice(offset, offset + len(fb)))
        roots.append(_factor_roots(kinds[f], offset))
        offset += len(fb)
    spec = LieAlgebraSpec(
        name="*".join(kinds),
        basis=np.array(basis),
        killing_gram=np.eye(offset),
        factors=kinds,
        factor_slices=tuple(slices),
        root_data=tuple(roots),
    )
    # (x, y) = -B(x, theta y) with theta(X) = -X^*
    B = spec.killing_matrix()
    theta = np.stack([spec.coords_of(-m.conj().T) for m in spec.basis], axis=1)
    gram = -B @ theta
    spec.killing_gram = _snap(0.5 * (gram + gram.T))
    return spec


@lru_cache(maxsize=None)
def algebra(name: str) -> LieAlgebraSpec:
    """Shipped algebras: ``sl2r``, ``sl2c_real`` and ``*``-joined products."""
    kinds = tuple(part.strip() for part in name.split("*"))
    for k in kinds:
        if k not in FACTOR_KINDS:
            raise SpecMismatch(f"unknown algebra factor {k!r}; expected one of {FACTOR_KINDS}")
    return _build(kinds)


@dataclass(frozen=True, eq=False)
class AlgebraVector:
    coords: np.ndarray
    spec: LieAlgebraSpec

    def matrix(self) -> np.ndarray:
        return self.spec.matrix_of(self.coords)

    def _same(self, other: "AlgebraVector"):
        if other.spec is not self.spec:
            raise SpecMismatch(f"vectors from {self.spec.name} and {other.spec.name}")

    def __add__(self, other: "AlgebraVector") -> "AlgebraVector":
        self._same(other)
        return AlgebraVector(self.coords + other.coords, self.spec)

    def __sub__(self, other: "AlgebraVector") -> "AlgebraVector":
        self._same(other)
        return AlgebraVector(self.coords - other.coords, self.spec)

    def __neg__(self) -> "AlgebraVector":
        return AlgebraVector(-self.coords, self.spec)

    def __mul__(self, s: float) -> "AlgebraVector":
        return AlgebraVector(float(s) * self.coords, self.spec)

    __rmul__ = __mul__

    def bracket(self, other: "AlgebraVector") -> "AlgebraVector":
        self._same(other)
        return AlgebraVector(self.spec.ad_matrix(self.coords) @ other.coords, self.spec)

    def norm(self) -> float:
        return norm(self)

    def allclose(self, other: "AlgebraVector", atol: float = 1e-12) -> bool:
        self._same(other)
        return bool(np.allclose(self.coords, other.coords, atol=atol, rtol=0))

    def __repr__(self) -> str:
        return f"AlgebraVector({self.spec.name}, {np.array2string(self.coords, precision=6)})"


# -- forms and norms ---------------------------------------------------------

def killing_form(x: AlgebraVector, y: AlgebraVector) -> float:
    """``tr(ad_x ad_y)`` from the structure constants."""
    x._same(y)
    s = x.spec
    return float(np.trace(s.ad_matrix(x.coords) @ s.ad_matrix(y.coords)))


def killing_trace_formula(x: AlgebraVector, y: AlgebraVector) -> float:
    """Killing form from the defining representation, factor by factor."""
    x._same(y)
    s = x.spec
    X, Y = x.matrix(), y.matrix()
    total = 0.0
    for f in range(s.n_factors):
        total += s.trace_scale(f) * float(np.real(np.trace(s.block(X, f) @ s.block(Y, f))))
    return total


def inner(x: AlgebraVector, y: AlgebraVector) -> float:
    x._same(y)
    return float(x.coords @ x.spec.killing_gram @ y.coords)


def gram_norm(x: AlgebraVector) -> float:
    return float(np.sqrt(max(inner(x, x), 0.0)))


def factor_norms(coords: np.ndarray, spec: LieAlgebraSpec) -> np.ndarray:
    """Per-factor norms for coordinate arrays of shape ``(..., k)``."""
    c = np.asarray(coords, float)
    out = []
    for sl in spec.factor_slices:
        G = spec.killing_gram[sl, sl]
        v = c[..., sl]
        out.append(np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", v, G, v), 0.0)))
    return np.stack(out, axis=-1)


def norm(x: AlgebraVector) -> float:
    """``(x, x)^(1/2)``; on a product the maximum over the factors."""
    return float(factor_norms(x.coords, x.spec).max())


# -- group actions -------------------------------------------------------------

def _check_group(spec: LieAlgebraSpec, g: np.ndarray) -> np.ndarray:
    g = np.asarray(g)
    n = spec.matrix_size
    if g.shape != (n, n):
        raise SpecMismatch(f"{spec.name} acts through {n}x{n} matrices, got shape {g.shape}")
    return g


def adjoint_group(g: np.ndarray, x: AlgebraVector) -> AlgebraVector:
    """``g X g^-1`` re-expanded in the basis."""
    s = x.spec
    g = _check_group(s, g)
    return AlgebraVector(s.coords_of(g @ x.matrix() @ np.linalg.inv(g)), s)


def ad(u: AlgebraVector) -> np.ndarray:
    return u.spec.ad_matrix(u.coords)


def nilpotency_degree(N: np.ndarray, tol: float = 1e-12) -> int:
    """Smallest ``m`` with ``N**m == 0``; raises if ``N`` is not nilpotent."""
    k = N.shape[0]
    scale = max(1.0, float(np.abs(N).max()))
    P = np.eye(k)
    for m in range(1, k + 1):
        P = P @ N
        if np.abs(P).max() <= tol * scale ** m:
            return m
    raise NotNilpotent(f"matrix is not nilpotent (power {k} has size {np.abs(P).max():.3g})")


def flow_coefficients(N: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Coefficient array ``(k, d+1)`` of ``exp(tN) x`` for nilpotent ``N``."""
    m = nilpotency_degree(N)
    cols = [np.asarray(x, float)]
    for j in range(1, m):
        cols.append(N @ cols[-1])
    return np.stack([c / factorial(j) for j, c in enumerate(cols)], axis=1)


def adjoint_flow_polynomials(u: AlgebraVector, x: AlgebraVector) -> np.ndarray:
    """Coordinates of ``Ad(exp(tu)) x`` as polynomials, low degree first.

    Row ``i`` holds the coefficients of coordinate ``i``.
    """
    u._same(x)
    return flow_coefficients(ad(u), x.coords)


def quadratic_form_polynomial(coeffs: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Coefficients of ``p(t)^T G p(t)`` for a vector polynomial ``p``."""
    k, d = coeffs.shape
    out = np.zeros(2 * d - 1)
    M = coeffs.T @ G @ coeffs
    for i in range(d):
        for j in range(d):
            out[i + j] += M[i, j]
    return out


def exp(x: AlgebraVector) -> np.ndarray:
    X = x.matrix()
    n = X.shape[0]
    P = np.eye(n, dtype=X.dtype)
    acc = np.eye(n, dtype=X.dtype)
    for j in range(1, n + 1):
        P = P @ X / j
        if not np.any(P):
            return acc
        acc = acc + P
    return scipy.linalg.expm(X)


def unipotent(u: AlgebraVector, t: float) -> np.ndarray:
    return exp(u * t)


# -- logarithms --------------------------------------------------------------

def _acosh_sq_near_one(w):
    return 2 * w - w ** 2 / 3 + 8 * w ** 3 / 45


def _lam_over_sinh(z):
    """``lam / sinh(lam)`` as a function of ``z = lam**2``."""
    series = 1 - z / 6 + 7 * z ** 2 / 360 - 31 * z ** 3 / 15120
    with np.errstate(all="ignore"):
        lam = np.sqrt(z + 0j)
        direct = lam / np.sinh(lam)
    return np.where(np.abs(z) < 1e-3, series, direct)


def sl2_log(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Principal logarithms of a stack ``(..., 2, 2)`` of determinant-one blocks.

    Returns ``(L, ok)``; ``ok`` is false where no principal logarithm exists
    (an eigenvalue on the closed negative real axis) or the round trip
    ``exp(L) = M`` fails.
    """
    M = np.asarray(M, dtype=complex)
    s = 0.5 * (M[..., 0, 0] + M[..., 1, 1])
    w = s - 1
    with np.errstate(all="ignore"):
        lam = np.arccosh(s)
        z = np.where(np.abs(w) < 1e-4, _acosh_sq_near_one(w), lam * lam)
    coef = _lam_over_sinh(z)
    eye = np.eye(2)
    L = coef[..., None, None] * (M - s[..., None, None] * eye)
    bad = (np.abs(s.imag) <= 1e-15 * np.maximum(1, np.abs(s.real))) & (s.real <= -1)
    ok = ~bad & np.all(np.isfinite(L), axis=(-2, -1))
    # round trip: exp(L) = cosh(lam) I + sinh(lam)/lam L, with cosh(lam) = s
    with np.errstate(all="ignore"):
        sinhc = np.where(np.abs(z) < 1e-3, 1 + z / 6 + z ** 2 / 120 + z ** 3 / 5040, 1.0 / coef)
        E = s[..., None, None] * eye + sinhc[..., None, None] * L
        resid = np.abs(E - M).max(axis=(-2, -1))
    scale = np.maximum(1.0, np.abs(M).max(axis=(-2, -1)))
    ok &= resid <= TOL.log_roundtrip * scale
    L = np.where(ok[..., None, None], L, np.nan)
    return L, ok


def log_principal(g: np.ndarray, spec: LieAlgebraSpec) -> AlgebraVector | None:
    """Principal logarithm as an algebra vector, or ``None`` if there is none."""
    g = _check_group(spec, g)
    if spec.factors:
        blocks = np.stack([spec.block(g, f) for f in range(spec.n_factors)])
        L, ok = sl2_log(blocks)
        if not ok.all():
            return None
        X = _block_diag(list(L), complex)
        if not spec.is_complex:
            if np.abs(X.imag).max() > TOL.log_roundtrip * max(1.0, np.abs(X).max()):
                return None
            X = X.real
    else:
        try:
            X = scipy.linalg.logm(g)
        except (ValueError, np.linalg.LinAlgError):
            return None
        if not np.all(np.isfinite(X)):
            return None
        if np.abs(scipy.linalg.expm(X) - g).max() > TOL.log_roundtrip * max(1.0, np.abs(g).max()):
            return None
        if not spec.is_complex:
            X = X.real
    try:
        return AlgebraVector(spec.coords_of(X), spec)
    except ReexpansionError:
        return None


# -- two-step nilpotent tools --------------------------------------------------

def bch2(x: AlgebraVector, y: AlgebraVector) -> AlgebraVector:
    """``x + y + [x, y]/2``, valid when ``x, y`` generate a 2-step algebra."""
    x._same(y)
    c = x.bracket(y)
    scale = max(1.0, gram_norm(x) + gram_norm(y)) ** 3
    for z in (x, y):
        r = np.abs(z.bracket(c).coords).max()
        if r > TOL.two_step * scale:
            raise TwoStepViolation(f"double bracket has size {r:.3g}")
    out = x + y + 0.5 * c
    lhs = exp(out)
    rhs = exp(x) @ exp(y)
    resid = float(np.abs(lhs - rhs).max())
    if resid > TOL.bch_check * max(1.0, float(np.abs(rhs).max())):
        raise TwoStepViolation(f"exp(x)exp(y) differs from exp(bch2) by {resid:.3g}")
    return out


def zspan_lattice(logs: Sequence[AlgebraVector]):
    """Basis of the Z-module generated by ``logs`` (in algebra coordinates)."""
    from .lattice_geometry import LatticeBasis, integer_span

    if not logs:
        raise ValueError("need at least one vector")
    spec = logs[0].spec
    for v in logs:
        logs[0]._same(v)
    V = np.array([v.coords for v in logs], dtype=float)
    basis = integer_span(V, spec.killing_gram)
    return LatticeBasis(basis, gram=spec.killing_gram)


# -- compact subgroup ------------------------------------------------------------

def random_compact(spec: LieAlgebraSpec, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of the maximal compact subgroup (SO(2) or SU(2) blocks)."""
    blocks = []
    for kind in spec.factors:
        if kind == "sl2r":
            th = rng.uniform(0, 2 * np.pi)
            blocks.append(np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]))
        else:
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            a, b = q[0] + 1j * q[1], q[2] + 1j * q[3]
            blocks.append(np.array([[a, -np.conj(b)], [b, np.conj(a)]]))
    return _block_diag(blocks, complex if spec.is_complex else float)


def diagonal(spec: LieAlgebraSpec, scales: Sequence[float]) -> np.ndarray:
    """``diag(s_i, 1/s_i)`` in each factor."""
    blocks = [np.diag([s, 1.0 / s]) for s in scales]
    return _block_diag(blocks, complex if spec.is_complex else float)


def group_element(spec: LieAlgebraSpec, blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Block-diagonal group element with determinant checks."""
    dtype = complex if spec.is_complex else float
    g = _block_diag([np.asarray(b, dtype=dtype) for b in blocks], dtype)
    g = _check_group(spec, g)
    for f in range(spec.n_factors):
        d = np.linalg.det(spec.block(g, f))
        if abs(d - 1) > 1e-10:
            raise SpecMismatch(f"factor {f} has determinant {d}, expected 1")
    return g


def exact_coords(x: AlgebraVector, limit: int = 10 ** 6) -> list[Fraction]:
    """Rational approximation of the coordinates (for exact downstream use)."""
    return [Fraction(float(c)).limit_denominator(limit) for c in x.coords]
