"""Unipotent trajectories on G/Gamma and their injectivity-radius bad sets.

For ``x = g Gamma`` the stabiliser of ``u_t x`` is ``u_t g Gamma g^-1 u_-t``.
A nontrivial ``gamma`` puts ``u_t x`` outside ``X_delta`` when
``u_t h u_-t`` lies in ``exp(b_delta)``, ``h = g gamma g^-1``.  With
``y = log h`` this is ``||Ad(u_t) y|| < delta``: a polynomial sublevel set in
``t`` per factor, intersected over the factors (the product norm is a max).

Elements are enumerated as reduced words in the generators.  Two filters
keep the work finite and sound:

* the trace prefilter discards ``gamma`` whose (conjugation invariant) trace
  is too far from 2 for any conjugate to lie in ``exp(b_delta)``;
* a norm certificate stops the enumeration once every word on the outer
  sphere is too large to matter anywhere in the time window.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .config import MAX_BALL_SIZE, MAX_WORD_RADIUS, TOL
from .errors import BudgetExceeded, ConditionStarViolation, PreconditionViolation, SpecMismatch
from .exact import ExactElement, GaussianRational, is_elliptic_block
from .intervals import IntervalUnion
from .km_engine import BoundReport, KMConstants, log_c_epsilon, log_c_epsilon_product
from .lie_core import (AlgebraVector, LieAlgebraSpec, ad, algebra, nilpotency_degree, sl2_log)
from .roots import extrema, sublevel_set


# -- specs ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteGroupSpec:
    """Discrete subgroup given by exact generators.

    ``torsion_free`` and ``is_lattice`` are declared properties used for
    reporting; ``None`` means unknown.
    """

    name: str
    algebra: str
    generators: tuple[ExactElement, ...]
    word_radius: int = 8
    torsion_free: bool | None = None
    is_lattice: bool | None = None
    notes: str = ""

    def __post_init__(self):
        spec = algebra(self.algebra)
        if not 0 <= self.word_radius <= MAX_WORD_RADIUS:
            raise BudgetExceeded(f"word radius {self.word_radius} exceeds {MAX_WORD_RADIUS}")
        for g in self.generators:
            if g.n_factors != spec.n_factors:
                raise SpecMismatch(f"generator has {g.n_factors} factors, {self.algebra} has {spec.n_factors}")
            for f, kind in enumerate(spec.factors):
                if kind == "sl2r" and any(isinstance(x, GaussianRational) and x.im != 0
                                          for row in g.blocks[f] for x in row):
                    raise SpecMismatch(f"complex entry in real factor {f}")
            if any(d != 1 for d in g.determinants()):
                raise SpecMismatch("generators must have determinant one in every factor")

    @property
    def lie(self) -> LieAlgebraSpec:
        return algebra(self.algebra)

    def with_radius(self, r: int) -> "DiscreteGroupSpec":
        return DiscreteGroupSpec(self.name, self.algebra, self.generators, r,
                                 self.torsion_free, self.is_lattice, self.notes)


@dataclass(frozen=True, eq=False)
class TrajectorySpec:
    """``t -> u_t g Gamma`` for ``t`` in ``window`` (default ``[0, T]``)."""

    u: AlgebraVector
    g: np.ndarray
    T: float
    delta: float
    r0: float | None = None
    window: tuple[float, float] | None = None
    allow_large_delta: bool = False

    def __post_init__(self):
        spec = self.u.spec
        nilpotency_degree(ad(self.u))
        g = np.asarray(self.g, dtype=complex if spec.is_complex else float)
        if g.shape != (spec.matrix_size,) * 2:
            raise SpecMismatch(f"basepoint must be {spec.matrix_size}x{spec.matrix_size}")
        for f in range(spec.n_factors):
            d = np.linalg.det(spec.block(g, f))
            if abs(d - 1) > 1e-10:
                raise SpecMismatch(f"basepoint factor {f} has determinant {d}")
        object.__setattr__(self, "g", g)
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.r0 is None:
            object.__setattr__(self, "r0", spec.default_r0)
        if self.window is None:
            object.__setattr__(self, "window", (0.0, float(self.T)))
        if self.delta > self.r0 and not self.allow_large_delta:
            raise PreconditionViolation(f"delta = {self.delta} exceeds r0 = {self.r0}")

    @property
    def spec(self) -> LieAlgebraSpec:
        return self.u.spec

    def replace(self, **kw) -> "TrajectorySpec":
        d = dict(u=self.u, g=self.g, T=self.T, delta=self.delta, r0=self.r0,
                 window=self.window, allow_large_delta=self.allow_large_delta)
        d.update(kw)
        return TrajectorySpec(**d)


# -- word enumeration --------------------------------------------------------------------

@dataclass(frozen=True)
class BallElement:
    word: str
    element: ExactElement
    parent: int          # index into the ball, -1 for generators


def _letters(n: int) -> list[tuple[str, str]]:
    names = "abcdefghijklmnopqrstuvwxyz"[:n]
    return [(c, c.upper()) for c in names]


def iter_ball_layers(spec: DiscreteGroupSpec, radius: int | None = None) -> Iterator[list[BallElement]]:
    """Layers of reduced words of length 1, 2, ..., ``radius``.

    Elements are deduplicated by exact equality across all layers; the
    identity is excluded.  Parent indices refer to the concatenation of the
    layers yielded so far.
    """
    radius = spec.word_radius if radius is None else radius
    gens = list(spec.generators)
    if not gens or radius == 0:
        return
    letters = _letters(len(gens))
    step = {}
    for (a, A), g in zip(letters, gens):
        step[a] = g
        step[A] = g.inverse()
    inverse_letter = {a: A for a, A in letters} | {A: a for a, A in letters}
    seen = {ExactElement.identity(gens[0].n_factors)}
    frontier: list[tuple[str, ExactElement, int]] = [("", ExactElement.identity(gens[0].n_factors), -1)]
    offset = 0
    total = 0
    for _ in range(radius):
        layer: list[BallElement] = []
        nxt = []
        for word, el, idx in frontier:
            for letter, mat in step.items():
                if word and inverse_letter[letter] == word[-1]:
                    continue
                new = el @ mat
                if new in seen:
                    continue
                seen.add(new)
                layer.append(BallElement(word + letter, new, idx))
                nxt.append((word + letter, new, offset + len(layer) - 1))
                total += 1
                if total > MAX_BALL_SIZE:
                    raise BudgetExceeded(f"ball exceeds {MAX_BALL_SIZE} elements")
        if not layer:
            return
        yield layer
        offset += len(layer)
        frontier = nxt


def enumerate_ball(spec: DiscreteGroupSpec, radius: int | None = None) -> list[tuple[str, ExactElement]]:
    out = []
    for layer in iter_ball_layers(spec, radius):
        out.extend((b.word, b.element) for b in layer)
    return out


@dataclass(frozen=True)
class _Layer:
    items: tuple[BallElement, ...]
    norms: np.ndarray            # (n, n_factors) operator norms of the blocks
    gaps: np.ndarray             # (n, n_factors) |tr - 2|
    monotone: bool               # no block norm drops from parent to child


class _LayerCache:
    """Ball layers of one group, computed on demand and shared between calls."""

    def __init__(self, group: DiscreteGroupSpec):
        self._it = iter_ball_layers(group)
        self._layers: list[_Layer] = []
        self._norms: list[np.ndarray] = []
        self._lock = threading.Lock()
        self._done = False

    def get(self, i: int) -> _Layer | None:
        with self._lock:
            while len(self._layers) <= i and not self._done:
                try:
                    items = next(self._it)
                except StopIteration:
                    self._done = True
                    break
                norms = np.array([_block_norms(b.element) for b in items])
                gaps = np.array([[_trace_gap(b.element, f) for f in range(b.element.n_factors)] for b in items])
                mono = all(b.parent < 0 or np.all(n >= self._norms[b.parent] * (1 - 1e-12))
                           for b, n in zip(items, norms))
                self._norms.extend(norms)
                self._layers.append(_Layer(tuple(items), norms, gaps, mono))
            return self._layers[i] if i < len(self._layers) else None


@lru_cache(maxsize=64)
def _layer_cache(group: DiscreteGroupSpec) -> _LayerCache:
    return _LayerCache(group)


# -- prefilter ---------------------------------------------------------------------------------

def trace_bound(spec: LieAlgebraSpec, delta: float, factor: int) -> float:
    """``c(delta)``: conjugates in ``exp(b_delta)`` have ``|tr - 2| <= c(delta)``.

    For ``y`` with ``||y|| < delta`` the eigenvalues ``+-lam`` satisfy
    ``|lam| <= ||y|| / kappa`` and ``|2 cosh(lam) - 2| <= 2 (cosh|lam| - 1)``.
    """
    x = delta / spec.trace_kappa(factor)
    return 4.0 * math.sinh(0.5 * x) ** 2


def _trace_gap(el: ExactElement, f: int) -> float:
    tr = el.trace(f)
    d = tr - 2
    if isinstance(d, GaussianRational):
        return math.hypot(float(d.re), float(d.im))
    return abs(float(d))


def trace_prefilter(gamma: ExactElement, delta: float, spec: LieAlgebraSpec) -> bool:
    """``False`` when no conjugate of ``gamma`` can lie in ``exp(b_delta)``."""
    return all(_trace_gap(gamma, f) <= trace_bound(spec, delta, f) * (1 + 1e-12)
               for f in range(gamma.n_factors))


# -- completeness certificate --------------------------------------------------------------

def _op_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2))


def relevance_bounds(traj: TrajectorySpec, radius: float) -> np.ndarray:
    """Per factor ``B_f`` such that any relevant ``gamma`` has ``||gamma_f|| <= B_f``.

    ``gamma = (u_t g)^-1 h' (u_t g)`` with ``h' = exp(y)``, ``||y|| < radius``,
    so ``||gamma_f|| <= cond(u_t g_f) exp(||y_f||_2)``; ``u_t = I + tU`` on
    each factor and ``||y_f||_2 <= ||y_f|| / sqrt(scale)``.
    """
    s = traj.spec
    U = traj.u.matrix()
    tau = max(abs(traj.window[0]), abs(traj.window[1]))
    out = []
    for f in range(s.n_factors):
        g = s.block(traj.g, f)
        Uf = s.block(U, f)
        grow = (1 + tau * _op_norm(Uf)) ** 2
        cond = _op_norm(g) * _op_norm(np.linalg.inv(g))
        out.append(grow * cond * math.exp(radius / math.sqrt(s.trace_scale(f))))
    return np.array(out)


def _block_norms(el: ExactElement) -> np.ndarray:
    return np.array([_op_norm(el.factor_array(f)) for f in range(el.n_factors)])


@dataclass(frozen=True)
class BallCertificate:
    radius_used: int
    complete: bool
    reason: str
    ball_size: int


# -- bad sets ----------------------------------------------------------------------------------

@dataclass(frozen=True)
class Contribution:
    word: str
    intervals: IntervalUnion


@dataclass(frozen=True)
class BadSetResult:
    intervals: IntervalUnion
    window: tuple[float, float]
    radius: float
    contributions: tuple[Contribution, ...]
    flagged: IntervalUnion
    certificate: BallCertificate
    n_enumerated: int
    n_prefiltered: int
    n_nolog: int
    trace_bounds: tuple[float, ...]
    max_degree: int
    notes: tuple[str, ...] = ()

    @property
    def measure(self) -> float:
        return self.intervals.measure

    @property
    def measure_upper(self) -> float:
        """Measure counting unconfirmed components too (conservative)."""
        return (self.intervals | self.flagged).measure

    @property
    def proportion(self) -> float:
        return self.measure / (self.window[1] - self.window[0])

    @property
    def proportion_upper(self) -> float:
        return self.measure_upper / (self.window[1] - self.window[0])


def _group_flow_polys(spec: LieAlgebraSpec, N: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``(n, k, d)`` coefficients of ``exp(tN) x`` for rows ``x`` of ``X``."""
    d = nilpotency_degree(N)
    cols = [X]
    for j in range(1, d):
        cols.append(cols[-1] @ N.T / j)
    return np.stack(cols, axis=-1)


def _factor_quadratics(spec: LieAlgebraSpec, P: np.ndarray) -> np.ndarray:
    """``(n, n_factors, 2d-1)`` coefficients of the per-factor squared norms."""
    n, k, d = P.shape
    out = np.zeros((n, spec.n_factors, 2 * d - 1))
    for f, sl in enumerate(spec.factor_slices):
        G = spec.killing_gram[sl, sl]
        M = np.einsum("nai,ab,nbj->nij", P[:, sl, :], G, P[:, sl, :])
        for i in range(d):
            for j in range(d):
                out[:, f, i + j] += M[:, i, j]
    return out


def _conjugate_logs(spec: LieAlgebraSpec, g: np.ndarray, elems: Sequence[ExactElement]):
    """Coordinates of ``log(g gamma g^-1)`` for each element, and a validity mask."""
    n = len(elems)
    if n == 0:
        return np.zeros((0, spec.dim)), np.zeros(0, bool)
    ginv = np.linalg.inv(g)
    mats = np.stack([g @ e.to_numpy(dtype=g.dtype) @ ginv for e in elems])
    blocks = np.stack([spec.block(mats, f) for f in range(spec.n_factors)], axis=1)
    L, ok = sl2_log(blocks)
    ok = ok.all(axis=1)
    full = np.zeros((n, spec.matrix_size, spec.matrix_size), dtype=complex)
    for f in range(spec.n_factors):
        full[:, 2 * f:2 * f + 2, 2 * f:2 * f + 2] = np.where(ok[:, None, None, None], L, 0)[:, f]
    if not spec.is_complex:
        ok &= np.abs(full.imag).max(axis=(1, 2)) <= TOL.log_roundtrip * np.maximum(1, np.abs(full).max(axis=(1, 2)))
        full = full.real
    coords = np.zeros((n, spec.dim))
    if ok.any():
        coords[ok] = spec.coords_of(full[ok])
    return coords, ok


def _confirm(spec: LieAlgebraSpec, traj: TrajectorySpec, el: ExactElement, x: np.ndarray,
             N: np.ndarray, t: float) -> bool:
    """Round trip at time ``t``: ``log(u_t h u_-t)`` equals ``Ad(u_t) log h``."""
    U = traj.u.matrix()
    ut = np.eye(spec.matrix_size) + t * U
    ut_inv = np.eye(spec.matrix_size) - t * U
    h = traj.g @ el.to_numpy(dtype=traj.g.dtype) @ np.linalg.inv(traj.g)
    m = ut @ h @ ut_inv
    blocks = np.stack([spec.block(m, f) for f in range(spec.n_factors)])
    L, ok = sl2_log(blocks)
    if not ok.all():
        return False
    P = _group_flow_polys(spec, N, x[None, :])[0]
    want = P @ (t ** np.arange(P.shape[1]))
    got_mat = np.zeros((spec.matrix_size,) * 2, dtype=complex)
    for f in range(spec.n_factors):
        got_mat[2 * f:2 * f + 2, 2 * f:2 * f + 2] = L[f]
    if not spec.is_complex:
        got_mat = got_mat.real
    got = spec.coords_of(got_mat, check=False)
    scale = max(1.0, float(np.abs(want).max()))
    return float(np.abs(got - want).max()) <= 1e-8 * scale


def _needs_u_nilpotent_blocks(traj: TrajectorySpec):
    U = traj.u.matrix()
    for f in range(traj.spec.n_factors):
        B = traj.spec.block(U, f)
        if np.abs(B @ B).max() > 1e-12 * max(1.0, np.abs(B).max() ** 2):
            raise PreconditionViolation("u must be nilpotent in every factor")


def _cyclic_certificate(group: DiscreteGroupSpec, traj: TrajectorySpec, radius: float,
                        N: np.ndarray) -> tuple[bool, str]:
    """For ``<c>`` with ``tr c >= 2`` real: ``log(h^n) = n log h``, so only
    ``|n| < radius / min_t max_f ||Ad(u_t) log h_f||`` can matter."""
    spec = traj.spec
    (c,) = group.generators
    for f in range(c.n_factors):
        tr = c.trace(f)
        if isinstance(tr, GaussianRational):
            if tr.im != 0:
                return False, "complex trace"
            tr = tr.re
        if tr < 2:
            return False, "generator trace below 2"
    X, ok = _conjugate_logs(spec, traj.g, [c])
    if not ok[0]:
        return False, "generator has no logarithm"
    Q = _factor_quadratics(spec, _group_flow_polys(spec, N, X))[0]
    lo, hi = traj.window
    best = 0.0
    for f in range(spec.n_factors):
        mn = max(extrema(Q[f], lo, hi)[0], 0.0) if hi > lo else max(float(np.polyval(Q[f][::-1], lo)), 0.0)
        best = max(best, math.sqrt(mn))
    if best == 0:
        return False, "generator conjugate reaches the identity"
    n_max = radius / best
    return n_max < group.word_radius + 1, f"|n| < {n_max:.4g} suffices"


def _scan(group: DiscreteGroupSpec, traj: TrajectorySpec, r: float, N: np.ndarray):
    """Prefiltered ball elements, enumerated until the completeness certificate holds."""
    spec = traj.spec
    need = relevance_bounds(traj, r)
    tb = np.array([trace_bound(spec, r, f) for f in range(spec.n_factors)]) * (1 + 1e-12)
    cache = _layer_cache(group)
    survivors: list[tuple[str, ExactElement]] = []
    n_enum, monotone, cert, exhausted, radius_used = 0, True, None, False, 0
    for i in range(group.word_radius):
        layer = cache.get(i)
        if layer is None:
            exhausted = True
            break
        radius_used = i + 1
        monotone &= layer.monotone
        n_enum += len(layer.items)
        keep = np.all(layer.gaps <= tb, axis=1)
        survivors.extend((b.word, b.element) for b, k in zip(layer.items, keep) if k)
        if monotone and np.all(np.any(layer.norms > need, axis=1)):
            cert = BallCertificate(radius_used, True, "sphere exceeds relevance bound, norms monotone", n_enum)
            break
    if cert is None:
        if not group.generators:
            cert = BallCertificate(0, True, "trivial group", 0)
        elif exhausted:
            cert = BallCertificate(radius_used, True, "finite group exhausted", n_enum)
        elif len(group.generators) == 1:
            ok, why = _cyclic_certificate(group, traj, r, N)
            cert = BallCertificate(radius_used, ok, "cyclic: " + why, n_enum)
        else:
            cert = BallCertificate(radius_used, False, "word radius reached before the relevance bound", n_enum)
    return survivors, cert


def bad_set(group: DiscreteGroupSpec, traj: TrajectorySpec, radius: float | None = None, *,
            window: tuple[float, float] | None = None) -> BadSetResult:
    """``{t in window : u_t g gamma g^-1 u_-t in exp(b_radius)`` for some nontrivial ``gamma``}.

    ``radius`` defaults to ``traj.delta``.
    """
    spec = traj.spec
    if group.lie is not spec:
        raise SpecMismatch(f"group lives in {group.algebra}, trajectory in {spec.name}")
    _needs_u_nilpotent_blocks(traj)
    r = traj.delta if radius is None else float(radius)
    notes = []
    if r < TOL.radius_floor:
        notes.append(f"radius {r:.3g} raised to floor {TOL.radius_floor:.3g}")
        r = TOL.radius_floor
    if r > traj.r0:
        notes.append(f"radius {r:.4g} exceeds r0 = {traj.r0:.4g}")
    lo, hi = window if window is not None else traj.window
    traj_w = traj.replace(window=(lo, hi))
    N = ad(traj.u)
    bounds = tuple(trace_bound(spec, r, f) for f in range(spec.n_factors))

    survivors, cert = _scan(group, traj_w, r, N)
    n_enum = cert.ball_size

    X, ok = _conjugate_logs(spec, traj.g, [e for _, e in survivors])
    n_nolog = int((~ok).sum())
    words = [w for (w, _), k in zip(survivors, ok) if k]
    elems = [e for (_, e), k in zip(survivors, ok) if k]
    X = X[ok]
    d = nilpotency_degree(N)
    contributions = []
    confirmed, flagged = [], []
    if len(elems):
        P = _group_flow_polys(spec, N, X)
        Q = _factor_quadratics(spec, P)
        scale_tol = 1e-14
        for i, (w, el) in enumerate(zip(words, elems)):
            part = IntervalUnion.interval(lo, hi) if hi > lo else IntervalUnion.empty()
            for f in range(spec.n_factors):
                q = Q[i, f]
                if np.all(np.abs(q) <= scale_tol):
                    continue       # trivial projection: the whole window
                part = part & sublevel_set(q, lo, hi, r * r)
                if not part:
                    break
            if not part:
                continue
            good = []
            for a, b in part:
                if _confirm(spec, traj, el, X[i], N, 0.5 * (a + b)):
                    good.append((a, b))
                else:
                    flagged.append((a, b))
            contributions.append(Contribution(w, IntervalUnion.from_pairs(good)))
            confirmed.extend(good)
    return BadSetResult(
        intervals=IntervalUnion.from_pairs(confirmed),
        window=(lo, hi),
        radius=r,
        contributions=tuple(contributions),
        flagged=IntervalUnion.from_pairs(flagged),
        certificate=cert,
        n_enumerated=n_enum,
        n_prefiltered=len(survivors),
        n_nolog=n_nolog,
        trace_bounds=bounds,
        max_degree=2 * (d - 1),
        notes=tuple(notes),
    )


def injectivity_violators(group: DiscreteGroupSpec, traj: TrajectorySpec, radius: float | None = None,
                          t: float = 0.0) -> list[str]:
    """Words ``gamma`` with ``u_t g gamma g^-1 u_-t`` in ``exp(b_radius)``."""
    spec = traj.spec
    r = traj.delta if radius is None else radius
    N = ad(traj.u)
    elems, _ = _scan(group, traj.replace(window=(t, t)), r, N)
    if not elems:
        return []
    X, ok = _conjugate_logs(spec, traj.g, [e for _, e in elems])
    P = _group_flow_polys(spec, N, X)
    vals = P @ (t ** np.arange(P.shape[2]))
    out = []
    for (w, _), v, k in zip(elems, vals, ok):
        if not k:
            continue
        norms = [math.sqrt(max(v[sl] @ spec.killing_gram[sl, sl] @ v[sl], 0.0)) for sl in spec.factor_slices]
        if max(norms) < r:
            out.append(w)
    return out


def in_X_delta(group: DiscreteGroupSpec, traj: TrajectorySpec) -> bool:
    return not injectivity_violators(group, traj)


# -- theorem checks --------------------------------------------------------------------------

def verify_theorem_1_1(group: DiscreteGroupSpec, traj: TrajectorySpec, eps: float,
                       constants: KMConstants | None = None) -> BoundReport:
    """Proportion of ``[0, T]`` outside ``X_{c_eps delta}`` against ``eps``."""
    spec = traj.spec
    constants = constants or KMConstants.for_algebra(spec, r0=traj.r0)
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if not in_X_delta(group, traj):
        raise PreconditionViolation("basepoint is not in X_delta")
    if spec.n_factors == 1:
        log_c = log_c_epsilon(eps, constants)
    else:
        log_c = log_c_epsilon_product(eps, constants, spec.n_factors)
    log_r = log_c + math.log(traj.delta)
    radius = math.exp(log_r) if log_r > math.log(TOL.radius_floor) else TOL.radius_floor
    res = bad_set(group, traj, radius)
    return BoundReport(
        measured=res.proportion_upper,
        bound=eps,
        constants=constants.as_dict() | {"log_c_eps": log_c, "radius": radius,
                                         "r0_configured_not_certified": True},
        witness=res.intervals | res.flagged,
        details={"group": group.name, "T": traj.T, "delta": traj.delta,
                 "certificate": res.certificate.reason, "complete": res.certificate.complete,
                 "torsion_free": group.torsion_free, "delta_within_r0": traj.delta <= traj.r0,
                 "notes": res.notes},
    )


# -- torsion and condition (*) ----------------------------------------------------------------

def find_torsion(group: DiscreteGroupSpec, max_order: int = 12, radius: int | None = None) -> str | None:
    """A word of finite order (at most ``max_order``) in the ball, if any."""
    for w, e in enumerate_ball(group, radius):
        p = e
        for _ in range(2, max_order + 1):
            p = p @ e
            if p.is_identity():
                return w
    return None


def check_condition_star(group: DiscreteGroupSpec, radius: int | None = None) -> int:
    """Raise if an enumerated element projects to an elliptic element in some factor.

    Returns the number of elements checked.
    """
    ball = enumerate_ball(group, radius)
    for w, e in ball:
        for f in range(e.n_factors):
            if is_elliptic_block(e, f):
                raise ConditionStarViolation(w, f, e.trace(f))
    return len(ball)


def product_bad_set(group: DiscreteGroupSpec, traj: TrajectorySpec, delta: float | None = None, *,
                    check_star: bool = True) -> BadSetResult:
    """Bad set in a product group after checking condition (*) on the ball."""
    if group.lie.n_factors < 2:
        raise SpecMismatch("product_bad_set needs a product group")
    if check_star:
        check_condition_star(group)
    return bad_set(group, traj, delta)


def diagonal_product(group: DiscreteGroupSpec, copies: int = 2, name: str | None = None) -> DiscreteGroupSpec:
    """``{(gamma, ..., gamma)}`` inside the product of ``copies`` factors."""
    gens = tuple(ExactElement(g.blocks * copies) for g in group.generators)
    return DiscreteGroupSpec(name or f"diag({group.name})^{copies}", "*".join([group.algebra] * copies),
                             gens, group.word_radius, group.torsion_free, None, "diagonal embedding")


def direct_product(groups: Sequence[DiscreteGroupSpec], name: str | None = None) -> DiscreteGroupSpec:
    """``Gamma_1 x ... x Gamma_n`` with generators placed factorwise."""
    algs = [g.algebra for g in groups]
    n = len(groups)
    one = ExactElement.identity(1).blocks[0]
    gens = []
    for i, grp in enumerate(groups):
        for g in grp.generators:
            blocks = [one] * n
            blocks[i] = g.blocks[0]
            gens.append(ExactElement(tuple(blocks)))
    tf = all(g.torsion_free for g in groups) if all(g.torsion_free is not None for g in groups) else None
    return DiscreteGroupSpec(name or " x ".join(g.name for g in groups), "*".join(algs), tuple(gens),
                             max(g.word_radius for g in groups), tf, None, "direct product")


def product_trajectory(trajs: Sequence[TrajectorySpec], T: float | None = None,
                       delta: float | None = None) -> TrajectorySpec:
    """Combine per-factor trajectories into one on the product group."""
    names = [t.spec.name for t in trajs]
    spec = algebra("*".join(names))
    coords = np.concatenate([t.u.coords for t in trajs])
    blocks = []
    for t in trajs:
        for f in range(t.spec.n_factors):
            blocks.append(t.spec.block(t.g, f))
    dtype = complex if spec.is_complex else float
    g = np.zeros((spec.matrix_size,) * 2, dtype=dtype)
    for i, b in enumerate(blocks):
        g[2 * i:2 * i + 2, 2 * i:2 * i + 2] = b
    T = T if T is not None else min(t.T for t in trajs)
    delta = delta if delta is not None else min(t.delta for t in trajs)
    return TrajectorySpec(spec.vector(coords), g, T, delta,
                          allow_large_delta=any(t.allow_large_delta for t in trajs))
