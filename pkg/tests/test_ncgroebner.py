import random

import pytest
from hypothesis import given, strategies as st

from magiccert.automaton import count_by_length, quotient_automaton
from magiccert.freealg import MonomialOrder, Polynomial, magic_ideal_generators
from magiccert.ncgroebner import (
    BudgetError,
    CapExceeded,
    GroebnerBasis,
    UncertifiedDegree,
    complete,
    is_member,
    is_normal_word,
    magic_basis,
    obstructions,
    quotient_slice_dimension_oracle,
    reduce,
    unresolved_obstructions,
)

words4 = st.lists(st.integers(0, 15), max_size=5).map(tuple)
polys4 = st.dictionaries(words4, st.integers(-3, 3), max_size=4).map(lambda d: Polynomial(4, d))


def x(i, j, n=4):
    return Polynomial.var(i, j, n)


def test_n1_is_trivial():
    gb = complete(magic_ideal_generators(1))
    assert [(r.lead, r.tail) for r in gb.rules] == [((0,), Polynomial.one(1))]
    assert gb.terminated


def test_reduce_examples(gb4):
    assert reduce(x(1, 1) * x(1, 1) - x(1, 1), gb4) == Polynomial.zero(4)
    assert reduce(x(1, 2), gb4) == x(1, 2)
    assert reduce(x(1, 1) * x(1, 2), gb4) == Polynomial.zero(4)


def test_membership_examples(gb4):
    assert is_member(x(1, 1) + x(1, 2) + x(1, 3) + x(1, 4) - 1, gb4)
    assert not is_member(x(1, 2), gb4)
    assert not is_member(x(1, 2) * x(2, 4), gb4)


def test_every_generator_is_a_member(gb4):
    assert all(is_member(g, gb4) for g in magic_ideal_generators(4))


def test_basis_shape(gb4):
    assert gb4.terminated
    assert len(gb4.rules) == 78
    assert sorted({len(r.lead) for r in gb4.rules}) == [1, 2, 3]
    for r in gb4.rules:
        assert all(gb4.order.compare(w, r.lead) < 0 for w in r.tail.terms)


def test_interreduced(gb4):
    leads = set(gb4.leads)
    for a in leads:
        for i in range(len(a)):
            for j in range(i + 1, len(a) + 1):
                if (i, j) != (0, len(a)):
                    assert a[i:j] not in leads
    for r in gb4.rules:
        assert all(is_normal_word(w, gb4) for w in r.tail.terms)


def test_all_obstructions_resolve(gb4):
    assert obstructions(gb4)
    assert unresolved_obstructions(gb4) == []


@given(polys4)
def test_reduce_idempotent(gb4, p):
    r = reduce(p, gb4)
    assert reduce(r, gb4) == r
    assert all(is_normal_word(w, gb4) for w in r.terms)


@given(polys4, polys4, st.integers(-4, 4))
def test_reduce_linear(gb4, p, q, c):
    assert reduce(p + c * q, gb4) == reduce(p, gb4) + c * reduce(q, gb4)


@given(polys4)
def test_stepwise_agrees(gb4, p):
    assert reduce(p, gb4, stepwise=True) == reduce(p, gb4)


@given(words4, words4)
def test_ideal_is_two_sided(gb4, a, b):
    gens = magic_ideal_generators(4)
    g = gens[sum(a + b) % len(gens)]
    assert is_member(Polynomial.from_word(a, 4) * g * Polynomial.from_word(b, 4), gb4)


def test_cap_exceeded_carries_partial_basis():
    with pytest.raises(CapExceeded) as info:
        complete(magic_ideal_generators(4), degree_cap=2)
    partial = info.value.partial
    assert partial.complete_up_to == 2 and not partial.terminated
    with pytest.raises(UncertifiedDegree):
        is_member(x(1, 1) * x(2, 2) * x(3, 3), partial)
    assert is_member(x(1, 1) * x(1, 2), partial)


def test_json_round_trip(gb4):
    back = GroebnerBasis.from_json(gb4.to_json())
    assert back.leads == gb4.leads
    rng = random.Random(1)
    for _ in range(50):
        w = tuple(rng.randrange(16) for _ in range(4))
        p = Polynomial.from_word(w, 4)
        assert reduce(p, back) == reduce(p, gb4)


ROW_MAJOR = [(i, j) for i in range(1, 5) for j in range(1, 5)]
OTHER_ORDERS = {
    "column-major": [(j, i) for i, j in ROW_MAJOR],
    "reversed": ROW_MAJOR[::-1],
    "x12 first": [(1, 2), (1, 1)] + ROW_MAJOR[2:],
}


@pytest.mark.parametrize("name", sorted(OTHER_ORDERS))
def test_other_orders_span_same_ideal(gb4, name):
    other = magic_basis(4, MonomialOrder.from_variables(OTHER_ORDERS[name], 4), degree_cap=8)
    for g in other.rules:
        assert is_member(g.polynomial(), gb4)
    for g in gb4.rules:
        assert is_member(g.polynomial(), other)
    assert count_by_length(quotient_automaton(other), 8).counts == tuple((2 * m + 1) ** 2 for m in range(9))


@pytest.mark.parametrize("n, dims", [(1, [1, 1, 1]), (2, [1, 2, 2, 2]), (3, [1, 5, 6, 6])])
def test_slice_oracle_matches_normal_words(n, dims):
    gb = magic_basis(n)
    cumulative = count_by_length(quotient_automaton(gb), len(dims) - 1).cumulative
    oracle = [quotient_slice_dimension_oracle(magic_ideal_generators(n), d) for d in range(len(dims))]
    assert oracle == list(cumulative)
    assert oracle == dims


def test_slice_oracle_n4():
    gens = magic_ideal_generators(4)
    assert [quotient_slice_dimension_oracle(gens, d) for d in range(3)] == [1, 10, 35]


def test_slice_oracle_budget():
    with pytest.raises(BudgetError):
        quotient_slice_dimension_oracle(magic_ideal_generators(4), 4)


@pytest.mark.slow
def test_larger_bases_terminate(gb5, gb6):
    assert gb5.terminated and gb6.terminated
    assert (len(gb5.rules), len(gb6.rules)) == (203, 418)
    assert gb5.max_lead_degree == gb6.max_lead_degree == 3
    assert unresolved_obstructions(gb5) == []
