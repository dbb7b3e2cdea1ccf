"""Brown-Peterson formal group laws from Hazewinkel generators.

The logarithm is built over Q[v_1..v_h] from p*l_n = sum_{i<n} l_i v_{n-i}^{p^i},
everything is reduced mod p with an exact p-integrality check, and v_i = 0
for i > h gives the truncated theory BP<h>.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from . import series as qs
from .series import QPoly


class BPError(ValueError):
    pass


def nu(p: int, m: int) -> int:
    """(p^{m+1} - 1)/(p - 1) = 1 + p + ... + p^m; nu(p, -1) = 0."""
    if m < -1:
        raise BPError(f"nu needs m >= -1, got {m}")
    return (p ** (m + 1) - 1) // (p - 1)


def nu_table(p: int, h: int) -> list[int]:
    return [nu(p, m) for m in range(h + 1)]


# ---------------------------------------------------------------------------

class GradedPoly:
    """Polynomial over F_p in v_1..v_h, |v_i| = 2(p^i - 1)."""

    __slots__ = ("p", "h", "terms")

    def __init__(self, p: int, h: int, terms: dict[tuple[int, ...], int] | None = None):
        self.p, self.h = p, h
        self.terms = {}
        for k, v in (terms or {}).items():
            if len(k) != h:
                raise BPError(f"exponent vector {k} has wrong length for h={h}")
            v %= p
            if v:
                self.terms[k] = v

    @classmethod
    def const(cls, p: int, h: int, c: int = 1) -> "GradedPoly":
        return cls(p, h, {(0,) * h: c})

    @classmethod
    def var(cls, p: int, h: int, i: int, power: int = 1) -> "GradedPoly":
        """v_i^power with 1-based i; v_i = 0 when i > h."""
        if i > h:
            return cls(p, h)
        e = [0] * h
        e[i - 1] = power
        return cls(p, h, {tuple(e): 1})

    @classmethod
    def from_qpoly(cls, q: QPoly, p: int, h: int) -> "GradedPoly":
        return cls(p, h, {k: qs.reduce_mod_p(v, p) for k, v in q.terms.items()})

    def degree_of(self, mono: tuple[int, ...]) -> int:
        return sum(2 * (self.p ** (i + 1) - 1) * e for i, e in enumerate(mono))

    def degrees(self) -> set[int]:
        return {self.degree_of(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def homogeneous_part(self, degree: int) -> "GradedPoly":
        return GradedPoly(self.p, self.h, {m: c for m, c in self.terms.items() if self.degree_of(m) == degree})

    def kill_below(self, r: int) -> "GradedPoly":
        """Reduce mod I_r: set v_1..v_{r-1} to zero."""
        return GradedPoly(self.p, self.h, {m: c for m, c in self.terms.items() if all(m[i] == 0 for i in range(min(r - 1, self.h)))})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = GradedPoly.const(self.p, self.h, other)
        return isinstance(other, GradedPoly) and (self.p, self.h, self.terms) == (other.p, other.h, other.terms)

    def __hash__(self):
        return hash((self.p, self.h, frozenset(self.terms.items())))

    def __add__(self, other: "GradedPoly") -> "GradedPoly":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return GradedPoly(self.p, self.h, out)

    def __neg__(self):
        return GradedPoly(self.p, self.h, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "GradedPoly") -> "GradedPoly":
        return self + (-other)

    def __mul__(self, other) -> "GradedPoly":
        if isinstance(other, int):
            return GradedPoly(self.p, self.h, {k: v * other for k, v in self.terms.items()})
        out: dict = {}
        for k1, a in self.terms.items():
            for k2, b in other.terms.items():
                k = tuple(x + y for x, y in zip(k1, k2))
                out[k] = out.get(k, 0) + a * b
        return GradedPoly(self.p, self.h, out)

    __rmul__ = __mul__

    def monomial_key(self, mono: tuple[int, ...]) -> str:
        parts = [f"v{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(mono) if e]
        return "*".join(parts) or "1"

    def to_json(self) -> dict[str, int]:
        return {self.monomial_key(m): c for m, c in sorted(self.terms.items())}

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join((f"{c}*" if c != 1 else "") + self.monomial_key(m) for m, c in sorted(self.terms.items()))


def parse_monomial(text: str, h: int) -> tuple[int, ...]:
    """Inverse of GradedPoly.monomial_key."""
    e = [0] * h
    if text.strip() == "1":
        return tuple(e)
    for part in text.split("*"):
        name, _, power = part.strip().partition("^")
        if not name.startswith("v") or not name[1:].isdigit():
            raise BPError(f"bad monomial factor {part!r}")
        i = int(name[1:])
        if not 1 <= i <= h:
            raise BPError(f"v{i} out of range for h={h}")
        e[i - 1] += int(power) if power else 1
    return tuple(e)


# ---------------------------------------------------------------------------
# rational stage

def hazewinkel_log(p: int, h: int, D: int) -> dict[int, QPoly]:
    """{p^n: l_n} for p^n <= D, with v_i = 0 for i > h already imposed.

    Killing v_{>h} before the recursion is legitimate because it is a ring map.
    """
    ell: list[QPoly] = [QPoly.const(1, h)]
    n = 1
    while p ** n <= D:
        acc = QPoly(nvars=h)
        for i in range(n):
            j = n - i
            if j <= h:
                acc = acc + ell[i] * QPoly.var(j - 1, h, p ** i)
        ell.append(acc * Fraction(1, p))
        n += 1
    return {p ** k: c for k, c in enumerate(ell)}


_cache: dict[tuple, object] = {}
_cache_lock = threading.RLock()


def _memo(key, build):
    # readers race freely; the first writer wins and later writers reuse it
    hit = _cache.get(key)
    if hit is not None:
        return hit
    with _cache_lock:
        hit = _cache.get(key)
        if hit is None:
            hit = build()
            _cache[key] = hit
        return hit


def _check_params(p: int, h: int, D: int) -> None:
    from .padic import is_prime

    if not is_prime(p):
        raise BPError(f"{p} is not prime")
    if h < 0:
        raise BPError("h must be >= 0")
    if D < 1:
        raise BPError("degree bound must be >= 1")


@dataclass(frozen=True)
class BPLaw:
    p: int
    h: int
    D: int
    coeffs: dict  # (i, j) -> GradedPoly

    def coefficient(self, i: int, j: int) -> GradedPoly:
        return self.coeffs.get((i, j), GradedPoly(self.p, self.h))

    def to_json(self) -> dict:
        return {"p": self.p, "h": self.h, "D": self.D,
                "coeffs": [[i, j, c.to_json()] for (i, j), c in sorted(self.coeffs.items())]}


def bp_fgl_rational(p: int, h: int, D: int) -> dict:
    _check_params(p, h, D)
    return _memo(("rational", p, h, D), lambda: qs.law_from_log(hazewinkel_log(p, h, D), D, QPoly.const(1, h)))


def bp_fgl_mod_p(p: int, h: int, D: int) -> BPLaw:
    """The BP<h> law mod p to total degree D; raises if any coefficient is not p-integral."""
    def build():
        F = bp_fgl_rational(p, h, D)
        try:
            coeffs = {k: GradedPoly.from_qpoly(v, p, h) for k, v in F.items()}
        except ArithmeticError as exc:
            raise BPError(f"p-integrality failed: {exc}") from exc
        return BPLaw(p, h, D, {k: v for k, v in coeffs.items() if v})
    _check_params(p, h, D)
    return _memo(("modp", p, h, D), build)


def _p_series_rational(p: int, h: int, D: int) -> dict[int, QPoly]:
    def build():
        one = QPoly.const(1, h)
        log = hazewinkel_log(p, h, D)
        exp = qs.reversion(log, D, one)
        return qs.compose(exp, qs.scale(log, Fraction(p)), D, one)
    return _memo(("pseries", p, h, D), build)


def p_series_mod_Ir(p: int, h: int, r: int, D: int) -> list[tuple[int, GradedPoly]]:
    """Coefficients of [p](x) mod (p, v_1, ..., v_{r-1}), computed as exp(p log x)."""
    _check_params(p, h, D)
    if not 0 <= r <= h:
        raise BPError(f"need 0 <= r <= h, got r={r}, h={h}")
    out = []
    for k, c in sorted(_p_series_rational(p, h, D).items()):
        try:
            g = GradedPoly.from_qpoly(c, p, h).kill_below(r)
        except ArithmeticError as exc:
            raise BPError(f"p-integrality failed in [p](x) at x^{k}: {exc}") from exc
        if g:
            out.append((k, g))
    return out


def formal_p_series(law: BPLaw, r: int = 0) -> list[tuple[int, GradedPoly]]:
    """[p](x) as the p-fold formal sum x +_F ... +_F x, reduced mod I_r.

    Independent of the exp/log route; used as a cross-check.
    """
    p, h, D = law.p, law.h, law.D
    x = {1: GradedPoly.const(p, h)}
    acc: dict[int, GradedPoly] = {}
    for _ in range(p):
        acc = law_evaluate(law, acc, x, D)
    return [(k, c.kill_below(r)) for k, c in sorted(acc.items()) if c.kill_below(r)]


def _umul(a: dict, b: dict, D: int) -> dict:
    out: dict = {}
    for i, x in a.items():
        for j, y in b.items():
            if i + j <= D:
                s = out.get(i + j)
                out[i + j] = x * y if s is None else s + x * y
    return {k: v for k, v in out.items() if v}


def law_evaluate(law: BPLaw, a: dict, b: dict, D: int) -> dict:
    """F(a(x), b(x)) for univariate series a, b (dicts exponent -> GradedPoly)."""
    p, h = law.p, law.h
    one = {0: GradedPoly.const(p, h)}
    max_i = max((i for i, _ in law.coeffs), default=0)
    max_j = max((j for _, j in law.coeffs), default=0)
    apow, bpow = [one], [one]
    for _ in range(max_i):
        apow.append(_umul(apow[-1], a, D))
    for _ in range(max_j):
        bpow.append(_umul(bpow[-1], b, D))
    out: dict = {}
    for (i, j), c in law.coeffs.items():
        for k, v in _umul(apow[i], bpow[j], D).items():
            s = out.get(k)
            out[k] = c * v if s is None else s + c * v
    return {k: v for k, v in out.items() if v}


def fsum_coefficients(p: int, h: int, r: int, D: int) -> dict[int, GradedPoly]:
    """a_i with [p](x) = sum^F a_i x^i (formal-group sum), mod (p, I_r).

    These, not the ordinary coefficients, are what enter the Ravenel-Wilson
    relation.  For Hazewinkel generators they come out as a_{p^j} = v_j
    (j >= max(r, 1)), all others zero.
    """
    if not 0 <= r <= h:
        raise BPError(f"need 0 <= r <= h, got r={r}, h={h}")
    law = bp_fgl_mod_p(p, h, D)
    law_r = BPLaw(p, h, D, {k: c.kill_below(r) for k, c in law.coeffs.items() if c.kill_below(r)})
    target = dict(p_series_mod_Ir(p, h, r, D))
    partial: dict[int, GradedPoly] = {}
    out: dict[int, GradedPoly] = {}
    for k in range(1, D + 1):
        zero = GradedPoly(p, h)
        a = target.get(k, zero) - partial.get(k, zero)
        if a:
            out[k] = a
            partial = law_evaluate(law_r, partial, {k: a}, D) if partial else {k: a}
    return out


def series_to_json(terms) -> list:
    items = terms.items() if isinstance(terms, dict) else terms
    return [[k, c.to_json()] for k, c in sorted(items)]


def iter_monomials(g: GradedPoly) -> Iterator[tuple[tuple[int, ...], int]]:
    yield from sorted(g.terms.items())
