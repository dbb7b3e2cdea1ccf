from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from chromalg import series as S

x, y = sympy.symbols("x y")
ONE = Fraction(1)


def to_sympy(a, var=x):
    return sum(sympy.Rational(v.numerator, v.denominator) * var ** k for k, v in a.items())


def truncated(expr, D):
    poly = sympy.Poly(sympy.expand(expr), x)
    return {m[0]: Fraction(int(c.p), int(c.q)) for m, c in zip(poly.monoms(), poly.coeffs()) if m[0] <= D and c}


series_st = st.dictionaries(st.integers(1, 8), st.fractions(min_value=-5, max_value=5, max_denominator=6), max_size=5)


@settings(max_examples=40, deadline=None)
@given(a=series_st, b=series_st)
def test_mul_matches_sympy(a, b):
    a = {k: v for k, v in a.items() if v}
    b = {k: v for k, v in b.items() if v}
    assert S.mul(a, b, 10) == truncated(to_sympy(a) * to_sympy(b), 10)


@settings(max_examples=30, deadline=None)
@given(f=series_st)
def test_reversion_inverts(f):
    f = {k: v for k, v in f.items() if v and k >= 2}
    f[1] = ONE
    D = 9
    g = S.reversion(f, D, ONE)
    assert S.compose(f, g, D, ONE) == {1: ONE}
    assert S.compose(g, f, D, ONE) == {1: ONE}


def test_reversion_of_log_is_exp_minus_one():
    D = 8
    log = {k: Fraction((-1) ** (k + 1), k) for k in range(1, D + 1)}
    exp = S.reversion(log, D, ONE)
    assert exp == truncated(sympy.series(sympy.exp(x) - 1, x, 0, D + 1).removeO(), D)


def test_gm_law_from_log():
    D = 7
    log = {k: Fraction((-1) ** (k + 1), k) for k in range(1, D + 1)}
    assert S.law_from_log(log, D, ONE) == {(1, 0): 1, (0, 1): 1, (1, 1): 1}


def test_additive_law_from_log():
    assert S.law_from_log({1: ONE}, 6, ONE) == {(1, 0): 1, (0, 1): 1}


def test_law_from_sparse_log_against_sympy():
    # log(x) = x + x^3/3: only odd degrees appear in the law
    D = 7
    log = {1: ONE, 3: Fraction(1, 3)}
    law = S.law_from_log(log, D, ONE)
    exp = S.reversion(log, D, ONE)
    z = x + y + (x ** 3 + y ** 3) / 3
    ref = sympy.expand(sum(sympy.Rational(c.numerator, c.denominator) * z ** k for k, c in exp.items()))
    poly = sympy.Poly(ref, x, y)
    want = {m: Fraction(int(c.p), int(c.q)) for m, c in zip(poly.monoms(), poly.coeffs()) if sum(m) <= D}
    assert law == want
    assert all((i + j) % 2 == 1 for i, j in law)


def test_reduce_mod_p():
    assert S.reduce_mod_p(Fraction(1, 3), 2) == 1
    assert S.reduce_mod_p(Fraction(-1, 2), 3) == 1
    with pytest.raises(ArithmeticError):
        S.reduce_mod_p(Fraction(1, 2), 2)


def test_compose_rejects_constant_term():
    with pytest.raises(ValueError):
        S.compose({1: ONE}, {0: ONE, 1: ONE}, 4, ONE)


def test_qpoly_arithmetic_against_sympy():
    v1, v2 = sympy.symbols("v1 v2")
    a = S.QPoly.var(0, 2) * Fraction(1, 2) + S.QPoly.var(1, 2, 2)
    b = S.QPoly.var(0, 2, 3) - S.QPoly.const(3, 2)
    prod = a * b
    ref = sympy.Poly(sympy.expand((v1 / 2 + v2 ** 2) * (v1 ** 3 - 3)), v1, v2)
    want = {m: Fraction(int(c.p), int(c.q)) for m, c in zip(ref.monoms(), ref.coeffs())}
    assert dict(prod.terms) == want
    assert (a ** 2) == a * a
    assert not (a - a)
    assert (a * b).subs_zero([0]) == S.QPoly.var(1, 2, 2) * Fraction(-3)
