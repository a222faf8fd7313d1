from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qndlab.exact import ExactElement, GaussianRational, format_scalar, is_elliptic_block, parse_scalar


def test_parse_scalar_forms():
    assert parse_scalar(3) == 3
    assert parse_scalar("1/2") == Fraction(1, 2)
    assert parse_scalar("-i") == GaussianRational(0, -1)
    assert parse_scalar("1+2i") == GaussianRational(1, 2)
    assert parse_scalar("3/2-1/3i") == GaussianRational(Fraction(3, 2), Fraction(-1, 3))
    with pytest.raises((TypeError, ValueError)):
        parse_scalar(0.5)


@pytest.mark.parametrize("text", ["0", "-7", "5/3", "i", "-i", "2+3i", "1/2-1/4i"])
def test_format_roundtrip(text):
    assert parse_scalar(format_scalar(parse_scalar(text))) == parse_scalar(text)


def test_gaussian_arithmetic_matches_complex():
    a, b = GaussianRational(1, 2), GaussianRational(Fraction(3, 4), -1)
    for got, want in [(a + b, complex(a) + complex(b)), (a - b, complex(a) - complex(b)),
                      (a * b, complex(a) * complex(b)), (a / b, complex(a) / complex(b))]:
        assert complex(got) == pytest.approx(want)


def test_determinant_checked():
    with pytest.raises(ValueError):
        ExactElement.from_entries([[2, 0], [0, 1]])


small = st.integers(-4, 4)


@st.composite
def sl2z_elements(draw):
    # products of elementary matrices stay in SL(2, Z)
    el = ExactElement.identity()
    for _ in range(draw(st.integers(0, 5))):
        n = draw(small)
        m = ExactElement.from_entries([[1, n], [0, 1]]) if draw(st.booleans()) else \
            ExactElement.from_entries([[1, 0], [n, 1]])
        el = el @ m
    return el


@given(sl2z_elements(), sl2z_elements())
def test_group_laws(a, b):
    assert (a @ a.inverse()).is_identity()
    assert np.allclose((a @ b).to_numpy(), a.to_numpy() @ b.to_numpy())
    assert (a @ b).inverse() == b.inverse() @ a.inverse()
    assert a ** 3 == a @ a @ a
    assert a ** -2 == a.inverse() @ a.inverse()


def test_gaussian_element_numpy():
    el = ExactElement.from_entries([[1, "i"], [0, 1]])
    M = el.to_numpy()
    assert M.dtype == complex and M[0, 1] == 1j


def test_elliptic_classification():
    S = ExactElement.from_entries([[0, -1], [1, 0]])
    T = ExactElement.from_entries([[1, 1], [0, 1]])
    minus = ExactElement.from_entries([[-1, 0], [0, -1]])
    assert is_elliptic_block(S, 0)
    assert not is_elliptic_block(T, 0)
    assert is_elliptic_block(minus, 0)
    assert not is_elliptic_block(ExactElement.identity(), 0)
    assert not is_elliptic_block(ExactElement.from_entries([[2, 1], [1, 1]]), 0)


def test_product_elements():
    el = ExactElement.from_entries([[1, 1], [0, 1]], [[0, -1], [1, 0]])
    assert el.n_factors == 2
    assert el.trace(1) == 0
    assert el.to_numpy().shape == (4, 4)
    assert not el.factor_is_identity(1)
