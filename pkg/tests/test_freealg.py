from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from magiccert.freealg import (
    AlphabetMismatch,
    InvalidSize,
    MonomialOrder,
    Polynomial,
    Variable,
    ZeroPolynomialError,
    compare,
    format_polynomial,
    leading_term,
    magic_ideal_generators,
    monomial,
    multiply,
    polynomial_from_json,
    polynomial_to_json,
)

N = 3
words = st.lists(st.integers(0, N * N - 1), max_size=4).map(tuple)
coeffs = st.one_of(st.integers(-5, 5), st.fractions(max_denominator=6).filter(lambda f: abs(f) < 5))
polys = st.dictionaries(words, coeffs, max_size=5).map(lambda d: Polynomial(N, d))
orders = st.permutations(range(N * N)).map(lambda r: MonomialOrder(N, tuple(r)))


def x(i, j, n=4):
    return Polynomial.var(i, j, n)


def test_variable_index_row_major():
    assert Variable(1, 1, 4).index == 0
    assert Variable(2, 3, 4).index == 6
    assert Variable.from_index(15, 4) == Variable(4, 4, 4)
    with pytest.raises(ValueError):
        Variable(5, 1, 4)


def test_compare_examples():
    order = MonomialOrder(4)
    one = ()
    x11, x12 = monomial([(1, 1)], 4), monomial([(1, 2)], 4)
    assert compare(one, x11, order) < 0
    assert compare(monomial([(1, 1), (2, 2)], 4), x12, order) > 0
    assert compare(monomial([(1, 1), (2, 2)], 4), monomial([(1, 1), (2, 1)], 4), order) > 0


@given(words, words, words, orders)
def test_order_is_total_and_transitive(a, b, c, order):
    ab, bc = compare(a, b, order), compare(b, c, order)
    assert compare(b, a, order) == -ab
    assert (ab == 0) == (a == b)
    if ab <= 0 and bc <= 0:
        assert compare(a, c, order) <= 0


@given(words, words, words, orders)
def test_order_is_multiplicative(a, b, w, order):
    # deglex is compatible with concatenation on either side
    if compare(a, b, order) < 0:
        assert compare(w + a, w + b, order) < 0
        assert compare(a + w, b + w, order) < 0


def test_multiply_examples():
    assert multiply(x(1, 2), x(2, 4)) == Polynomial.from_word(monomial([(1, 2), (2, 4)], 4), 4)
    assert (x(1, 1) - 1) * (x(1, 1) + 1) == x(1, 1) * x(1, 1) - 1
    assert multiply(Polynomial.zero(4), x(3, 3)) == Polynomial.zero(4)


@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert (p + q) * r == p * r + q * r
    assert p - p == Polynomial.zero(N)


@given(polys)
def test_zero_coefficients_never_stored(p):
    assert all(c != 0 for c in p.terms.values())


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        x(1, 1, 3) + x(1, 1, 4)
    with pytest.raises(AlphabetMismatch):
        compare((0,), (20,), MonomialOrder(4))


def test_leading_term():
    p = 3 * x(1, 1) * x(2, 2) - x(4, 4) + Fraction(1, 2)
    assert leading_term(p) == (monomial([(1, 1), (2, 2)], 4), 3)
    with pytest.raises(ZeroPolynomialError):
        leading_term(Polynomial.zero(4))
    # reversing the ranks changes which degree-2 word leads
    rev = MonomialOrder(4, tuple(reversed(range(16))))
    q = x(1, 1) * x(2, 2) + x(4, 4) * x(1, 1)
    assert leading_term(q, rev)[0] == monomial([(1, 1), (2, 2)], 4)
    assert leading_term(q)[0] == monomial([(4, 4), (1, 1)], 4)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_generator_count(n):
    assert len(magic_ideal_generators(n)) == n * n + 2 * n + 2 * n * n * (n - 1)


def test_generators_content():
    gens = set(magic_ideal_generators(2))
    assert x(1, 1, 2) * x(1, 1, 2) - x(1, 1, 2) in gens
    assert x(1, 1, 2) + x(1, 2, 2) - 1 in gens
    assert x(1, 1, 2) * x(1, 2, 2) in gens
    assert x(1, 1, 2) * x(2, 1, 2) in gens
    with pytest.raises(InvalidSize):
        magic_ideal_generators(0)


@given(polys)
def test_json_round_trip(p):
    assert polynomial_from_json(polynomial_to_json(p), N) == p


def test_format():
    assert format_polynomial(x(1, 2) * x(2, 4) - 1) == "x12*x24 - 1"
    assert format_polynomial(Polynomial.zero(4)) == "0"
    assert format_polynomial(3 * x(1, 1) - Fraction(1, 2) * x(2, 2)) == "-1/2*x22 + 3*x11"
