from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from universefan.errors import ParseError, ZeroDenominator
from universefan.ratexpr import (LinForm, RatExpr, compare, equal, evaluate, exact_difference_is_zero,
                                 from_json, lin, parse_canonical, parse_linform, residue_at, substitute,
                                 to_canonical, to_json)

VARS = ["s:1", "s:2", "s:12", "Ep:1", "Em:12", "a:3"]

coef = st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(lambda q: q != 0)
forms = st.dictionaries(st.sampled_from(VARS), coef, min_size=1, max_size=3).map(LinForm)
# a term never repeats a factor (up to scaling), so only simple poles occur
terms = st.tuples(st.integers(-3, 3).filter(bool),
                  st.lists(forms, min_size=1, max_size=3, unique_by=lambda f: f.normalize()[1]))
exprs = st.lists(terms, max_size=4).map(RatExpr)


@given(exprs)
def test_canonical_round_trip(e):
    text = to_canonical(e)
    back = parse_canonical(text)
    assert back == e
    assert to_canonical(back) == text


@given(exprs)
def test_json_round_trip(e):
    assert from_json(to_json(e)) == e


@given(exprs, exprs)
def test_exact_and_sampled_agree(a, b):
    for lhs, rhs in ((a, a), (a, b), (a + b, b + a)):
        res = compare(lhs, rhs, seed=7)
        if res["exact"] is not None:
            assert res["exact"] == res["sampled"]


def test_partial_fractions_are_equal():
    x, y = LinForm("s:1"), LinForm("s:2")
    lhs = RatExpr([(1, [x, y])])
    rhs = RatExpr([(1, [x, x + y]), (1, [y, x + y])])
    assert exact_difference_is_zero(lhs, rhs)
    assert not exact_difference_is_zero(lhs, RatExpr([(1, [x, x + y])]))
    assert equal(lhs, rhs)


def test_equal_on_hyperplane():
    x, y = LinForm("s:1"), LinForm("s:2")
    # 1/x and 1/y agree once x = y
    assert not equal(RatExpr([(1, [x])]), RatExpr([(1, [y])]))
    assert equal(RatExpr([(1, [x])]), RatExpr([(1, [y])]), on_hyperplanes=[x - y])


def test_parse_linform_sums():
    f = parse_linform("Ep:123+Em:12-2·s:1")
    assert f.coeffs == {"Ep:123": 1, "Em:12": 1, "s:1": -2}
    assert LinForm("Ep:123+Em:12").coeffs == {"Ep:123+Em:12": 1}  # a plain string is one variable


def test_residue_rescales_pole():
    x, y = LinForm("s:1"), LinForm("s:2")
    e = RatExpr([(1, [lin("s:1", "s:1"), y]), (1, [y])])
    r = residue_at(e, x)
    assert equal(r, RatExpr([(Fraction(1, 2), [y])]))


def test_substitute_zero_denominator():
    e = RatExpr([(1, [lin("s:1", "s:2")])])
    with pytest.raises(ZeroDenominator):
        substitute(e, {"s:2": LinForm({"s:1": -1})})


def test_evaluate():
    e = parse_canonical("1/(s:1*s:2) + 2/(s:1)")
    assert evaluate(e, {"s:1": Fraction(2), "s:2": Fraction(3)}) == Fraction(1, 6) + 1


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_canonical("1/(s:1*")
    with pytest.raises(ParseError):
        parse_canonical("1/(q:1)")
