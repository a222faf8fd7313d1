import numpy as np
import pytest
import scipy.linalg
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from qndlab.errors import NotNilpotent, SpecMismatch, TwoStepViolation
from qndlab.lattice_geometry import express_integer
from qndlab.lie_core import (LieAlgebraSpec, ad, adjoint_flow_polynomials, adjoint_group, algebra,
                             bch2, exp, gram_norm, killing_form, killing_trace_formula,
                             log_principal, norm, random_compact, sl2_log, zspan_lattice)

SL2R = algebra("sl2r")
SL2C = algebra("sl2c_real")
H, E, F = SL2R.named("H"), SL2R.named("E"), SL2R.named("F")
SPECS = ["sl2r", "sl2c_real", "sl2r*sl2r", "sl2r*sl2c_real"]


def brute_killing(spec, x, y):
    # trace of ad_x ad_y computed by bracketing basis matrices directly
    total = 0.0
    X, Y = x.matrix(), y.matrix()
    for i, Bi in enumerate(spec.basis):
        inner = Y @ Bi - Bi @ Y
        outer = X @ inner - inner @ X
        total += spec.coords_of(outer)[i]
    return total


class TestStructure:
    @pytest.mark.parametrize("name", SPECS)
    def test_jacobi_and_antisymmetry(self, name):
        s = algebra(name)
        c = s.structure_constants
        assert np.abs(c + c.transpose(1, 0, 2)).max() < 1e-12
        assert s.jacobi_residual() < 1e-12

    @pytest.mark.parametrize("name", SPECS)
    def test_gram_positive_definite(self, name):
        G = algebra(name).killing_gram
        assert np.allclose(G, G.T)
        assert np.linalg.eigvalsh(G).min() > 0

    @pytest.mark.parametrize("name", SPECS)
    def test_killing_matches_trace_formula(self, name, rng):
        s = algebra(name)
        for _ in range(10):
            x, y = s.vector(rng.normal(size=s.dim)), s.vector(rng.normal(size=s.dim))
            assert abs(killing_form(x, y) - killing_trace_formula(x, y)) < 1e-10 * (1 + abs(killing_form(x, y)))

    @pytest.mark.parametrize("name", SPECS)
    def test_root_data_partitions_each_factor(self, name):
        s = algebra(name)
        for sl, rd in zip(s.factor_slices, s.root_data):
            assert rd.all_indices() == tuple(range(sl.start, sl.stop))
            assert sorted(rd.a + rd.m) == sorted(rd.z)

    def test_root_spaces_are_eigenspaces(self):
        for s in (SL2R, SL2C):
            a = s.basis_vector(s.root_data[0].a[0])
            A = ad(a)
            for i in s.root_data[0].u_plus:
                assert np.allclose(A[:, i], 2 * np.eye(s.dim)[i])
            for i in s.root_data[0].u_minus:
                assert np.allclose(A[:, i], -2 * np.eye(s.dim)[i])


class TestKillingAndNorm:
    def test_killing_examples(self):
        assert killing_form(E, E) == 0
        assert killing_form(SL2R.zero(), H) == 0
        assert abs(killing_form(H, H) - 8) < 1e-12
        assert abs(brute_killing(SL2R, H, H) - 8) < 1e-12
        assert abs(brute_killing(SL2R, E, E)) < 1e-12

    def test_norm_examples(self):
        assert abs(norm(E) - 2) < 1e-12
        assert norm(SL2R.zero()) == 0
        assert abs(norm(H) - np.sqrt(8)) < 1e-12

    def test_product_norm_is_max_over_factors(self):
        s = algebra("sl2r*sl2r")
        x = s.named("E", 0) + 3 * s.named("E", 1)
        assert abs(norm(x) - 6) < 1e-12
        assert abs(gram_norm(x) - np.sqrt(4 + 36)) < 1e-12

    def test_spec_mismatch(self):
        with pytest.raises(SpecMismatch):
            killing_form(E, SL2C.named("E"))

    @pytest.mark.parametrize("name", SPECS)
    def test_norm_is_compact_invariant(self, name, rng):
        s = algebra(name)
        x = s.vector(rng.normal(size=s.dim))
        for _ in range(50):
            k = random_compact(s, rng)
            assert abs(norm(adjoint_group(k, x)) - norm(x)) < 1e-9


class TestAdjoint:
    def test_identity(self):
        assert adjoint_group(np.eye(2), H).allclose(H)

    def test_unipotent_conjugation_symbolic(self):
        t = sp.symbols("t")
        u = sp.Matrix([[1, t], [0, 1]])
        Hs = sp.Matrix([[1, 0], [0, -1]])
        conj = sp.simplify(u * Hs * u.inv())
        for tv in (0.0, 1.0, -2.5):
            ref = np.array(conj.subs(t, tv), dtype=float)
            got = adjoint_group(np.array([[1, tv], [0, 1]]), H)
            assert np.allclose(got.matrix(), ref, atol=1e-12)
            assert np.allclose(got.coords, [1, -2 * tv, 0], atol=1e-12)
        assert adjoint_group(np.array([[1, 3.0], [0, 1]]), E).allclose(E)

    def test_flow_polynomial_examples(self):
        assert np.allclose(adjoint_flow_polynomials(E, E)[:, 0], E.coords)
        assert np.allclose(adjoint_flow_polynomials(E, E)[:, 1:], 0)
        P = adjoint_flow_polynomials(E, H)
        assert np.allclose(P[:, :2], [[1, 0], [0, -2], [0, 0]])
        Q = adjoint_flow_polynomials(E, F)
        # F + tH - t^2 E
        assert np.allclose(Q, [[0, 1, 0], [0, 0, -1], [1, 0, 0]])

    def test_not_nilpotent(self):
        with pytest.raises(NotNilpotent):
            adjoint_flow_polynomials(H, E)

    @pytest.mark.parametrize("name", SPECS)
    def test_flow_agrees_with_conjugation(self, name, rng):
        s = algebra(name)
        for _ in range(5):
            nil = [i for rd in s.root_data for i in rd.u_plus]
            u = s.vector(np.zeros(s.dim))
            u.coords[nil] = rng.normal(size=len(nil))
            k = random_compact(s, rng)
            u = adjoint_group(k, u)
            x = s.vector(rng.normal(size=s.dim))
            P = adjoint_flow_polynomials(u, x)
            for t in rng.uniform(-3, 3, size=10):
                want = adjoint_group(exp(u * t), x).coords
                got = np.array([np.polyval(row[::-1], t) for row in P])
                assert np.abs(got - want).max() < 1e-8 * (1 + np.abs(want).max())


class TestExpLog:
    def test_exp_examples(self):
        assert np.allclose(exp(SL2R.zero()), np.eye(2))
        assert np.array_equal(exp(E), [[1, 1], [0, 1]])
        assert np.allclose(exp(H), np.diag([np.e, 1 / np.e]))

    def test_log_examples(self):
        assert log_principal(np.eye(2), SL2R).allclose(SL2R.zero())
        assert log_principal(np.array([[1.0, 1], [0, 1]]), SL2R).allclose(E)
        assert log_principal(-np.eye(2), SL2R) is None
        assert log_principal(np.array([[-1.0, 1], [0, -1]]), SL2R) is None
        assert log_principal(np.diag([-2.0, -0.5]), SL2R) is None

    def test_log_elliptic_rotation(self):
        th = 2.0
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        x = log_principal(R, SL2R)
        assert np.allclose(scipy.linalg.expm(x.matrix()), R, atol=1e-12)

    @pytest.mark.parametrize("name", ["sl2r", "sl2c_real", "sl2r*sl2c_real"])
    def test_exp_log_roundtrip_near_identity(self, name, rng):
        s = algebra(name)
        for _ in range(100):
            x = s.vector(rng.normal(size=s.dim))
            g = exp(x * (0.4 / max(np.abs(x.matrix()).sum(), 1e-12)))
            assert np.abs(g - np.eye(s.matrix_size)).max() <= 0.5
            y = log_principal(g, s)
            assert np.abs(exp(y) - g).max() < 1e-9

    def test_log_matches_scipy_away_from_identity(self, rng):
        for _ in range(50):
            M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            M /= np.sqrt(np.linalg.det(M))
            L, ok = sl2_log(M)
            if ok:
                assert np.allclose(L, scipy.linalg.logm(M), atol=1e-8)

    def test_log_series_branch_near_identity(self):
        for eps in (1e-3, 1e-6, 1e-9):
            M = np.array([[1 + eps, 1.0], [eps * eps / 2, 1 - eps]])
            M /= np.sqrt(np.linalg.det(M))
            L, ok = sl2_log(M)
            assert ok
            assert np.allclose(scipy.linalg.expm(L), M, atol=1e-12)


def heisenberg():
    X = np.zeros((3, 3)); X[0, 1] = 1
    Y = np.zeros((3, 3)); Y[1, 2] = 1
    Z = np.zeros((3, 3)); Z[0, 2] = 1
    return LieAlgebraSpec.from_basis("heis", [X, Y, Z], np.eye(3))


class TestBCH:
    def test_trivial(self):
        assert bch2(E, SL2R.zero()).allclose(E)
        assert bch2(E, 2 * E).allclose(3 * E)

    def test_heisenberg_correction(self):
        h = heisenberg()
        x, y = h.vector([1.0, 0, 0]), h.vector([0, 2.0, 0])
        z = bch2(x, y)
        assert np.allclose(z.coords, [1, 2, 1])
        assert np.allclose(exp(z), exp(x) @ exp(y))

    def test_not_two_step(self):
        with pytest.raises(TwoStepViolation):
            bch2(E, F)


class TestZspan:
    def test_examples(self):
        b = zspan_lattice([E])
        assert b.rank == 1 and np.allclose(np.abs(b.vectors), [E.coords])
        b = zspan_lattice([2 * E, 3 * E])
        assert b.rank == 1 and np.allclose(np.abs(b.vectors), [E.coords])
        b = zspan_lattice([E, H - 2 * E])
        assert b.rank == 2
        for v in (E, H - 2 * E):
            _, r = express_integer(b, v.coords)
            assert r < 1e-9
        for v in b.vectors:
            coeffs, *_ = np.linalg.lstsq(np.array([E.coords, (H - 2 * E).coords]).T, v, rcond=None)
            assert np.allclose(coeffs, np.rint(coeffs))

    @given(st.lists(st.lists(st.integers(-6, 6), min_size=2, max_size=2), min_size=1, max_size=5))
    def test_same_module(self, coeff_rows):
        base = np.array([E.coords, (H + 0.5 * E).coords])
        vecs = [SL2R.vector(np.array(c, float) @ base) for c in coeff_rows]
        if all(not any(c) for c in coeff_rows):
            return
        b = zspan_lattice(vecs)
        for v in vecs:
            _, r = express_integer(b, v.coords)
            assert r < 1e-7
        # output inside the input module: coefficients in `base` are integers,
        # and the index matches the integer determinant
        for w in b.vectors:
            c, *_ = np.linalg.lstsq(base.T, w, rcond=None)
            assert np.allclose(c, np.rint(c), atol=1e-7)
        M = np.array(coeff_rows)
        rank = np.linalg.matrix_rank(M)
        assert b.rank == rank
