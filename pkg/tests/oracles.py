"""Independent reference computations used by several test modules."""
from __future__ import annotations

import itertools

import numpy as np

from qndlab.lattice_geometry import LatticeBasis


def series_log(M: np.ndarray, terms: int = 80) -> np.ndarray:
    """``log M`` by the Mercator series; only valid for ``||M - I|| < 1``."""
    n = M.shape[-1]
    X = M - np.eye(n)
    out = np.zeros_like(X)
    P = np.broadcast_to(np.eye(n), X.shape).astype(X.dtype)
    for k in range(1, terms + 1):
        P = P @ X
        out = out + ((-1) ** (k + 1) / k) * P
    return out


def dense_bad_mask(group, traj, radius: float, ts: np.ndarray) -> np.ndarray:
    """For each ``t``, whether some ball element conjugates into ``exp(b_radius)``.

    Uses a coarse trace filter (|tr - 2| < 0.5 in every factor), explicit
    matrix conjugation and the series logarithm; the norm is evaluated from
    the algebra's Gram matrix.
    """
    from qndlab.flow_lab import enumerate_ball

    spec = traj.spec
    dtype = complex if spec.is_complex else float
    g = traj.g.astype(dtype)
    ginv = np.linalg.inv(g)
    U = traj.u.matrix().astype(dtype)
    elems = []
    for _, e in enumerate_ball(group):
        if all(abs(complex(e.trace(f)) - 2) < 0.5 for f in range(e.n_factors)):
            elems.append(g @ e.to_numpy(dtype=dtype) @ ginv)
    mask = np.zeros(len(ts), bool)
    if not elems:
        return mask
    I = np.eye(spec.matrix_size)
    ut = I[None] + ts[:, None, None] * U[None]
    ut_inv = I[None] - ts[:, None, None] * U[None]
    for h in elems:
        M = ut @ h @ ut_inv
        near = np.ones(len(ts), bool)
        norms = np.zeros((len(ts), spec.n_factors))
        for f in range(spec.n_factors):
            B = M[:, 2 * f:2 * f + 2, 2 * f:2 * f + 2]
            dist = np.linalg.norm(B - np.eye(2), ord=2, axis=(1, 2))
            near &= dist < 0.5
        if not near.any():
            continue
        L = series_log(M[near])
        if not spec.is_complex:
            L = L.real
        coords = spec.coords_of(L, check=False)
        for f, sl in enumerate(spec.factor_slices):
            G = spec.killing_gram[sl, sl]
            c = coords[:, sl]
            norms[near, f] = np.sqrt(np.maximum(np.einsum("ni,ij,nj->n", c, G, c), 0))
        hit = near & (norms.max(axis=1) < radius)
        mask |= hit
    return mask


def dense_bad_measure(group, traj, radius: float, n: int = 10_000) -> float:
    lo, hi = traj.window
    ts = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    return float(dense_bad_mask(group, traj, radius, ts).mean() * (hi - lo))


def brute_d1_on_grid(lattice: LatticeBasis, N: np.ndarray, ts: np.ndarray, box: int) -> np.ndarray:
    """``d_1(exp(tN) Lambda)`` at each ``t`` by scanning integer coefficients in a box.

    ``N`` must be nilpotent, so ``exp(tN)`` is the finite sum of ``t^j N^j / j!``.
    """
    r, k = lattice.rank, lattice.ambient_dim
    coeffs = np.array([c for c in itertools.product(range(-box, box + 1), repeat=r) if any(c)], float)
    V = coeffs @ lattice.vectors
    terms, P, fact = [V], np.eye(k), 1.0
    for j in range(1, k):
        P = P @ N
        fact *= j
        terms.append(V @ (P / fact).T)
    out = np.empty(len(ts))
    for start in range(0, len(ts), 500):
        t = ts[start:start + 500]
        W = sum(t[:, None, None] ** j * T[None] for j, T in enumerate(terms))
        q = np.einsum("tij,jk,tik->ti", W, lattice.gram, W)
        out[start:start + 500] = np.sqrt(q.min(axis=1))
    return out
