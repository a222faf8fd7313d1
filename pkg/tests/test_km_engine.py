import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qndlab.errors import BudgetExceeded, PreconditionViolation
from qndlab.km_engine import (KMConstants, beta_product, beta_uniform, c_epsilon, c_epsilon_product,
                              check_km_bound, detect_invariant_sublattice, log_c_epsilon,
                              measure_small_d1, min_covolume_root, rho)
from qndlab.lattice_geometry import LatticeBasis
from qndlab.lie_core import algebra

from oracles import brute_d1_on_grid

N2 = np.array([[0.0, 1.0], [0.0, 0.0]])


def random_lattice(rng, k):
    while True:
        A = rng.normal(size=(k, k))
        if abs(np.linalg.det(A)) > 0.2:
            break
    return LatticeBasis(A / abs(np.linalg.det(A)) ** (1 / k))


def random_nilpotent(rng, k, scale=1.0):
    return np.triu(rng.uniform(-scale, scale, size=(k, k)), 1)


# -- constants -----------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3, 4, 6, 8])
def test_C_k_matches_independent_formula(k):
    want = mpmath.mpf(k) ** 3 * 2 ** k * mpmath.mpf(k * k + 1) ** (mpmath.mpf(1) / (k * k))
    c = KMConstants(k)
    assert c.C_k == pytest.approx(float(want), rel=1e-12)
    assert c.alpha_k == pytest.approx(1 / k ** 2)


def test_constants_validation():
    with pytest.raises(ValueError):
        KMConstants(0)
    with pytest.raises(ValueError):
        KMConstants(3, l_M=0)
    c = KMConstants.for_algebra(algebra("sl2c_real"))
    assert (c.k, c.l_M) == (6, 4)
    assert c.r0 == pytest.approx(0.1 / 6)


def test_c_epsilon_frozen_values():
    c = KMConstants(3, l_M=2)
    # (0.5 / C_3)^9 / 16 with C_3 = 27 * 8 * 10^(1/9)
    C3 = 27 * 8 * 10 ** (1 / 9)
    assert c_epsilon(0.5, c) == pytest.approx((0.5 / C3) ** 9 / 16, rel=1e-12)
    assert log_c_epsilon(0.5, c) == pytest.approx(9 * math.log(0.5 / C3) - math.log(16), rel=1e-14)
    with pytest.raises(ValueError):
        c_epsilon(1.5, c)


def test_c_epsilon_underflow_handled_in_log_space():
    c = KMConstants(8, l_M=2)
    assert c_epsilon(0.1, c) == 0.0
    assert math.isfinite(log_c_epsilon(0.1, c))
    assert log_c_epsilon(0.1, c) < -700


def test_product_constant():
    c = KMConstants(6, l_M=4)
    want = c_epsilon(0.5 / 6, c) ** 2
    assert c_epsilon_product(0.5, c, 2) == pytest.approx(want, rel=1e-10)
    assert c_epsilon_product(0.5, c, 1) == pytest.approx(c_epsilon(0.25, c), rel=1e-12)


def test_beta_uniform_and_product():
    c = KMConstants(3)
    k2 = 9
    C = mpmath.mpf(c.C_k)
    eps = mpmath.mpf("0.3")
    want = max(2 ** (k2 + 4) * C ** (2 * k2) / eps ** k2, 2 ** (k2 + 3) * C ** (2 * k2) / eps ** (2 * k2))
    assert mpmath.almosteq(beta_uniform(0.3, c), want, rel_eps=mpmath.mpf(10) ** -10)
    cc = mpmath.mpf(c_epsilon(0.15, c))
    want_p = max(16 * C ** 18 / (2 * cc), (8 * C ** 9 / (2 * cc)) ** 2)
    assert mpmath.almosteq(beta_product(0.3, c, 1), want_p, rel_eps=mpmath.mpf(10) ** -8)
    assert beta_product(0.3, c, 2) > beta_product(0.3, c, 1)


# -- rho ----------------------------------------------------------------------------------

def test_rho_examples():
    Z2 = LatticeBasis.standard(2)
    assert rho(Z2, N2, (0, 1)).rho == pytest.approx(0.5)
    assert rho(Z2, np.zeros((2, 2)), (0, 1)).rho == pytest.approx(0.5)
    small = rho(Z2.scaled(0.01), np.zeros((2, 2)), (0, 1))
    assert small.rho == pytest.approx(0.01)
    assert small.attaining_subgroup.rank == 1


def test_rho_unclamped_scales_linearly():
    rng = np.random.default_rng(1)
    for _ in range(5):
        lat = random_lattice(rng, 3)
        N = random_nilpotent(rng, 3)
        base = rho(lat.scaled(0.1), N, (0, 1)).unclamped
        assert math.isfinite(base)
        for a in (0.02, 0.05, 0.5):
            assert rho(lat.scaled(0.1 * a), N, (0, 1)).unclamped == pytest.approx(a * base, rel=1e-9)
        assert rho(lat.scaled(50.0), N, (0, 1)).rho == pytest.approx(1 / 3)


def test_rho_is_sup_over_window():
    # Z^2 under t -> [[1,t],[0,1]]: e_2 moves to (t, 1), e_1 is fixed with norm 1
    lat = LatticeBasis.standard(2).scaled(0.1)
    r = rho(lat, N2, (0, 5))
    # e_1 stays at 0.1; that is the smallest sup
    assert r.unclamped == pytest.approx(0.1)


def test_min_covolume_root():
    lat = LatticeBasis(np.array([[0.3, 0.0], [0.0, 2.0]]))
    assert min_covolume_root(lat) == pytest.approx(0.3)


# -- measure of small d_1 ---------------------------------------------------------------------

def test_measure_examples():
    Z2 = LatticeBasis.standard(2)
    assert measure_small_d1(Z2, N2, (0, 1), 0.1)[0] == 0.0
    m, s = measure_small_d1(Z2, N2, (0, 1), 1.5)
    assert m == pytest.approx(1.0)
    assert measure_small_d1(Z2, N2, (3, 3), 0.5)[0] == 0.0


def test_measure_shear_closed_form():
    # e_2 - n e_1 flows to (t - n, 1): below eps when |t - n| < sqrt(eps^2 - 1)
    Z2 = LatticeBasis.standard(2)
    eps = 1.2
    m, s = measure_small_d1(Z2, N2, (0, 10), eps)
    w = math.sqrt(eps ** 2 - 1)
    # e_1 itself has norm 1 < 1.2, so all of [0, 10] is bad
    assert m == pytest.approx(10.0)
    lat = LatticeBasis(np.array([[2.0, 0.0], [0.0, 1.0]]))
    m, s = measure_small_d1(lat, N2, (0, 10), eps)
    # vectors (t - 2n, 1): centres 0, 2, ..., 10 with half-width w
    centres = np.arange(0, 11, 2)
    want = sum(min(c + w, 10) - max(c - w, 0) for c in centres)
    assert m == pytest.approx(want, abs=1e-9)
    assert len(s) == len(centres)


@pytest.mark.parametrize("seed", range(6))
def test_measure_matches_dense_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    lat = random_lattice(rng, 2)
    N = random_nilpotent(rng, 2, 1.5)
    T = float(rng.uniform(1, 4))
    eps = float(rng.uniform(0.4, 1.1))
    m, _ = measure_small_d1(lat, N, (0, T), eps)
    n = 2000
    ts = (np.arange(n) + 0.5) * T / n
    d1 = brute_d1_on_grid(lat, N, ts, box=10)
    est = (d1 < eps).mean() * T
    assert abs(m - est) <= 2 * T / n + 1e-3


def test_measure_algebra_coordinates():
    s = algebra("sl2r")
    E = s.named("E")
    ZE = LatticeBasis(np.array([E.coords]), gram=s.killing_gram)
    m, _ = measure_small_d1(ZE, E, (0, 10), 2.5)
    assert m == pytest.approx(10.0)
    assert measure_small_d1(ZE, E, (0, 10), 1.9)[0] == 0.0


def test_measure_budget_reports_partial():
    lat = LatticeBasis.standard(2).scaled(0.01)
    with pytest.raises(BudgetExceeded) as info:
        measure_small_d1(lat, N2, (0, 1), 1.0, budget=50)
    assert info.value.partial is not None


# -- the bound ------------------------------------------------------------------------------------

def test_bound_example():
    rep = check_km_bound(LatticeBasis.standard(2), N2, (0, 1), 0.1)
    assert rep.measured == 0.0
    assert rep.passed
    assert rep.bound == pytest.approx(KMConstants(2).C_k * (0.1 / 0.5) ** 0.25)


def test_bound_requires_eps_below_rho():
    with pytest.raises(PreconditionViolation):
        check_km_bound(LatticeBasis.standard(2), N2, (0, 1), 0.6)


@settings(max_examples=25)
@given(seed=st.integers(0, 10 ** 6), k=st.integers(2, 3), frac=st.floats(0.05, 0.95))
def test_bound_holds_randomly(seed, k, frac):
    rng = np.random.default_rng(seed)
    lat = random_lattice(rng, k).scaled(float(rng.uniform(0.1, 1.0)))
    N = random_nilpotent(rng, k)
    B = (0.0, float(rng.uniform(0.5, 3)))
    r = rho(lat, N, B)
    rep = check_km_bound(lat, N, B, frac * r.rho, rho_result=r)
    assert rep.passed


# -- invariant sublattices ------------------------------------------------------------------------

def test_detector_examples():
    s = algebra("sl2r")
    E, H = s.named("E"), s.named("H")
    ZE = LatticeBasis(np.array([E.coords]), gram=s.killing_gram)
    res = detect_invariant_sublattice(ZE, E, 3.0)
    assert res.found
    assert res.covolume == pytest.approx(2.0, abs=1e-9)
    ZH = LatticeBasis(np.array([H.coords]), gram=s.killing_gram)
    assert not detect_invariant_sublattice(ZH, E, 100.0).found


def test_detector_threshold_is_respected():
    s = algebra("sl2r")
    E = s.named("E")
    ZE = LatticeBasis(np.array([E.coords]), gram=s.killing_gram)
    assert not detect_invariant_sublattice(ZE, E, 1.5).found


def test_detector_on_full_lattice():
    # Z^2 under the shear keeps Z e_1 invariant
    res = detect_invariant_sublattice(LatticeBasis.standard(2), N2, 1.5)
    assert res.found and res.subgroup.rank == 1
    assert res.covolume == pytest.approx(1.0)
