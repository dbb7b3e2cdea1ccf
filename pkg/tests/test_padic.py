import random

import pytest
from hypothesis import given, settings, strategies as st

from chromalg.padic import (
    DivisibilityError,
    NotAUnitError,
    PadicError,
    PrecisionError,
    ResidueField,
    RingConfig,
    least_irreducible,
    make_ring,
    norm,
    teichmuller,
    witt_from_json,
)

CONFIGS = [(2, 1, 8), (3, 1, 6), (5, 1, 4), (2, 2, 8), (3, 2, 5), (2, 3, 6)]


def brute_least_irreducible(p, d):
    """Smallest monic degree-d polynomial (x^{d-1} coeff first) with no factor of degree <= d/2."""
    import itertools

    def polymod_divides(f, g):
        # does g divide f over F_p?  both lowest-degree first, g monic
        f = list(f)
        while len(f) >= len(g):
            c = f[-1]
            if c:
                shift = len(f) - len(g)
                for i, gc in enumerate(g):
                    f[shift + i] = (f[shift + i] - c * gc) % p
            f.pop()
        return not any(f)

    for high in itertools.product(range(p), repeat=d):
        f = list(reversed(high)) + [1]
        ok = True
        for k in range(1, d // 2 + 1):
            for low in itertools.product(range(p), repeat=k):
                if polymod_divides(f, list(low) + [1]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return tuple(f)


class TestRing:
    def test_make_ring_basic(self):
        r = make_ring(2, 1, 8)
        assert r.modulus == 256
        assert make_ring(3, 1, 6).modulus == 729

    def test_f4_polynomial(self):
        assert least_irreducible(2, 2) == (1, 1, 1)  # x^2 + x + 1

    @pytest.mark.parametrize("p,d", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2)])
    def test_least_irreducible_against_search(self, p, d):
        assert least_irreducible(p, d) == brute_least_irreducible(p, d)

    @pytest.mark.parametrize("bad", [(4, 1, 8), (1, 1, 8), (2, 0, 8), (2, 1, 0)])
    def test_bad_params(self, bad):
        with pytest.raises(PadicError):
            RingConfig(*bad)

    def test_defining_poly_has_teichmuller_root(self):
        r = make_ring(2, 2, 8)
        t = r.generator()
        f = r.defining_poly
        acc = r.zero()
        for i, c in enumerate(f):
            acc = acc + t ** i * c
        assert acc.is_zero()
        assert t ** (r.q - 1) == 1


class TestArithmetic:
    def test_inverse_example(self):
        r = make_ring(2, 1, 8)
        assert r.element(3).inv().coords == (171,)
        assert (r.element(3) * r.element(171)).coords == (1,)
        # extended Euclid oracle
        assert pow(3, -1, 256) == 171

    def test_inverse_of_nonunit(self):
        with pytest.raises(NotAUnitError):
            make_ring(2, 1, 8).element(6).inv()

    @pytest.mark.parametrize("cfg", CONFIGS)
    def test_identities(self, cfg):
        r = make_ring(*cfg)
        rng = random.Random(1)
        for _ in range(20):
            a = r.random_element(rng)
            assert a + r.zero() == a
            assert a * r.one() == a
            if a.is_unit():
                assert a * a.inv() == 1

    @pytest.mark.parametrize("cfg", CONFIGS)
    def test_unit_iff_residue_nonzero(self, cfg):
        r = make_ring(*cfg)
        rng = random.Random(2)
        for _ in range(30):
            a = r.random_element(rng)
            assert a.is_unit() == (not a.reduce().is_zero())

    def test_div_p(self):
        r = make_ring(3, 1, 5)
        x = r.element(9 * 7).div_p(2)
        assert x.coords == (7,) and x.prec == 3
        with pytest.raises(DivisibilityError):
            r.element(10).div_p()
        with pytest.raises(PrecisionError):
            r.element(0).div_p(5)

    def test_json_roundtrip_keeps_precision(self):
        r = make_ring(3, 2, 5)
        a = r.element([9, 18]).div_p()
        b = witt_from_json(r, a.to_json())
        assert b == a and b.prec == a.prec == 4
        assert r.element([1, 2]).to_json() == {"coords": [1, 2]}

    @pytest.mark.parametrize("obj", [{"coords": [1]}, {"coords": [1, "a"]}, {"coords": [1, 2], "prec": 0}, {}, {"coords": [1, 999]}])
    def test_json_rejects(self, obj):
        with pytest.raises(PadicError):
            witt_from_json(make_ring(3, 2, 5), obj)


@pytest.mark.parametrize("cfg", CONFIGS)
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_ring_axioms(cfg, seed):
    r = make_ring(*cfg)
    rng = random.Random(seed)
    a, b, c = (r.random_element(rng) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


@pytest.mark.parametrize("cfg", CONFIGS)
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_frobenius_is_ring_hom_lifting_x_to_xp(cfg, seed):
    r = make_ring(*cfg)
    rng = random.Random(seed)
    a, b = r.random_element(rng), r.random_element(rng)
    assert (a + b).frobenius() == a.frobenius() + b.frobenius()
    assert (a * b).frobenius() == a.frobenius() * b.frobenius()
    assert a.frobenius().reduce() == a.reduce() ** r.p
    assert a.frobenius(r.d) == a
    assert a.frobenius().frobenius_inv() == a
    assert norm(a.frobenius()) == norm(a)


def test_frobenius_trivial_for_d1():
    r = make_ring(5, 1, 4)
    rng = random.Random(3)
    for _ in range(10):
        a = r.random_element(rng)
        assert a.frobenius() == a and norm(a) == a


def test_frobenius_on_f4_root_of_unity():
    r = make_ring(2, 2, 8)
    w = teichmuller(r, [0, 1])
    assert w ** 3 == 1
    assert w.frobenius().reduce() == (w * w).reduce()
    assert w.frobenius() == w * w  # exact on Teichmuller lifts


class TestTeichmuller:
    def test_examples(self):
        r = make_ring(3, 1, 4)
        w = teichmuller(r, 2)
        assert w.coords == (80,)
        assert w ** 3 == w and w.reduce().coords == (2,)
        assert teichmuller(r, 0).is_zero() and teichmuller(r, 1) == 1

    def test_fixed_point_oracle(self):
        # w = lim x^{p^k}
        for p, N in [(3, 4), (5, 3), (7, 3)]:
            r = make_ring(p, 1, N)
            for x in range(p):
                y = x
                for _ in range(N + 2):
                    y = pow(y, p, p ** N)
                assert teichmuller(r, x).coords == (y,)

    @pytest.mark.parametrize("cfg", CONFIGS)
    def test_section_and_norm(self, cfg):
        r = make_ring(*cfg)
        F = r.residue_field()
        for code in F.elements():
            x = F.to_coords(code)
            t = teichmuller(r, x)
            assert t.reduce().coords == x
            e = sum(r.p ** i for i in range(r.d))
            assert norm(t) == teichmuller(r, F.to_coords(F.pow(code, e)))


class TestResidueField:
    @pytest.mark.parametrize("p,d", [(2, 2), (3, 2), (2, 3)])
    def test_field_axioms(self, p, d):
        F = ResidueField(p, d)
        for a in F.elements():
            if a:
                assert F.mul(a, F.inv(a)) == 1
            assert F.frob(a, d) == a
        assert ResidueField(p, d) is F

    def test_reduction_is_hom(self):
        r = make_ring(3, 2, 4)
        rng = random.Random(5)
        for _ in range(20):
            a, b = r.random_element(rng), r.random_element(rng)
            assert (a * b).reduce() == a.reduce() * b.reduce()
            assert (a + b).reduce() == a.reduce() + b.reduce()
