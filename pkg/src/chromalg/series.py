"""Sparse truncated power series with exact coefficients.

Coefficients may be anything closed under + and * with a truthiness test for
zero: Fraction, int, or QPoly (polynomials in v_1..v_h over Q).  These are
used to build formal group laws from logarithms over the p-local rationals
before reducing mod p.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Mapping

Series = dict  # int -> coeff
BiSeries = dict  # (int, int) -> coeff


class QPoly:
    """Polynomial over Q in commuting variables; exponent tuples of fixed length."""

    __slots__ = ("terms", "nvars")

    def __init__(self, terms: Mapping[tuple[int, ...], Fraction] | None = None, nvars: int = 0):
        self.nvars = nvars
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, c, nvars: int) -> "QPoly":
        return cls({(0,) * nvars: Fraction(c)}, nvars)

    @classmethod
    def var(cls, i: int, nvars: int, power: int = 1) -> "QPoly":
        """v_{i+1}^power (0-based index i)."""
        e = [0] * nvars
        e[i] = power
        return cls({tuple(e): Fraction(1)}, nvars)

    def _lift(self, other) -> "QPoly":
        if isinstance(other, QPoly):
            return other
        return QPoly.const(other, self.nvars)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        other = self._lift(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        r = QPoly(nvars=self.nvars)
        r.terms = out
        return r

    __radd__ = __add__

    def __neg__(self):
        r = QPoly(nvars=self.nvars)
        r.terms = {k: -v for k, v in self.terms.items()}
        return r

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, QPoly):
            c = Fraction(other)
            r = QPoly(nvars=self.nvars)
            r.terms = {k: v * c for k, v in self.terms.items()} if c else {}
            return r
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                s = out.get(k, 0) + v1 * v2
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        r = QPoly(nvars=self.nvars)
        r.terms = out
        return r

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = QPoly.const(1, self.nvars)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def subs_zero(self, indices: Iterable[int]) -> "QPoly":
        """Set the listed (0-based) variables to zero."""
        idx = list(indices)
        r = QPoly(nvars=self.nvars)
        r.terms = {k: v for k, v in self.terms.items() if all(k[i] == 0 for i in idx)}
        return r

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, v in sorted(self.terms.items()):
            mono = "*".join(f"v{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(k) if e)
            parts.append(f"{v}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# univariate

def mul(a: Series, b: Series, D: int) -> Series:
    out: Series = {}
    for i, x in a.items():
        if i > D:
            continue
        for j, y in b.items():
            k = i + j
            if k > D:
                continue
            s = out.get(k, 0) + x * y
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def add(a: Series, b: Series) -> Series:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, 0) + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def scale(a: Series, c) -> Series:
    out = {}
    for k, v in a.items():
        s = v * c
        if s:
            out[k] = s
    return out


def power(a: Series, e: int, D: int, one) -> Series:
    result: Series = {0: one}
    base = a
    while e:
        if e & 1:
            result = mul(result, base, D)
        e >>= 1
        if e:
            base = mul(base, base, D)
    return result


def compose(f: Series, g: Series, D: int, one) -> Series:
    """f(g(x)) for g without constant term."""
    if 0 in g and g[0]:
        raise ValueError("inner series must have zero constant term")
    out: Series = {}
    if 0 in f:
        out[0] = f[0]
    gp: Series = {0: one}
    for k in range(1, D + 1):
        gp = mul(gp, g, D)
        if not gp:
            break
        if f.get(k):
            out = add(out, scale(gp, f[k]))
    return out


def reversion(f: Series, D: int, one) -> Series:
    """Compositional inverse of f = x + O(x^2)."""
    if f.get(1) != 1 or f.get(0):
        raise ValueError("reversion needs f = x + higher terms")
    higher = {k: v for k, v in f.items() if k >= 2}
    if not higher:
        return {1: one}
    step = min(higher) - 1
    g: Series = {1: one}
    # g <- x - sum_{k>=2} f_k g^k, each pass fixes `step` more degrees
    correct = 1
    while correct < D:
        acc: Series = {1: one}
        for k, c in sorted(higher.items()):
            if k > D:
                break
            acc = add(acc, scale(power(g, k, D, one), -c))
        g = acc
        correct += step
    return g


# ---------------------------------------------------------------------------
# bivariate

def bimul(a: BiSeries, b: BiSeries, D: int) -> BiSeries:
    out: BiSeries = {}
    for (i1, j1), x in a.items():
        d1 = i1 + j1
        if d1 > D:
            continue
        for (i2, j2), y in b.items():
            if d1 + i2 + j2 > D:
                continue
            k = (i1 + i2, j1 + j2)
            s = out.get(k, 0) + x * y
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def biadd(a: BiSeries, b: BiSeries) -> BiSeries:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, 0) + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def law_from_log(log: Series, D: int, one) -> BiSeries:
    """F(x, y) = exp(log x + log y) truncated at total degree D."""
    exp = reversion(log, D, one)
    z: BiSeries = {}
    for k, c in log.items():
        z = biadd(z, {(k, 0): c, (0, k): c})
    needed = sorted(k for k, c in exp.items() if c and 1 <= k <= D)
    # graded logs only produce exp terms in one residue class; stride over it
    stride = 0
    for k in needed:
        stride = math.gcd(stride, k - needed[0])
    stride = stride or 1
    zstep: BiSeries = {(0, 0): one}
    for _ in range(stride):
        zstep = bimul(zstep, z, D)
    zp: BiSeries = {(0, 0): one}
    for _ in range(needed[0]):
        zp = bimul(zp, z, D)
    out: BiSeries = {}
    k = needed[0]
    while k <= D and zp:
        c = exp.get(k)
        if c:
            out = biadd(out, {key: v * c for key, v in zp.items() if v * c})
        k += stride
        zp = bimul(zp, zstep, D)
    return out


def reduce_mod_p(value: Fraction, p: int) -> int:
    """Image of a p-integral rational in F_p; raises if not p-integral."""
    num, den = value.numerator, value.denominator
    if den % p == 0:
        raise ArithmeticError(f"{value} is not {p}-integral")
    return num * pow(den, -1, p) % p


def map_coeffs(a: dict, fn: Callable) -> dict:
    out = {}
    for k, v in a.items():
        w = fn(v)
        if w:
            out[k] = w
    return out
