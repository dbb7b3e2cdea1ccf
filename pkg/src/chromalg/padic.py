"""Truncated arithmetic in Z_p and the unramified Witt ring W(F_{p^d}).

Elements of W(F_{p^d}) are stored as coordinate vectors in the power basis
1, t, ..., t^{d-1}, where t is a root of a monic polynomial over Z/p^N that
lifts the lexicographically least irreducible polynomial of degree d over
F_p.  The lift is chosen so that t is a Teichmuller element; the Witt
Frobenius then sends t to t^p and is precomputed as a d x d matrix.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence


class PadicError(ValueError):
    pass


class NotAUnitError(PadicError):
    pass


class DivisibilityError(PadicError):
    pass


class PrecisionError(PadicError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


# ---------------------------------------------------------------------------
# polynomials over Z/m, coefficient lists lowest degree first

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a: Sequence[int], b: Sequence[int], f: Sequence[int], m: int) -> list[int]:
    """a*b mod (f, m) with f monic of degree d; a, b of length d."""
    d = len(f) - 1
    prod = [0] * (2 * d - 1 if d else 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    for k in range(len(prod) - 1, d - 1, -1):
        c = prod[k] % m
        if c:
            for i in range(d):
                prod[k - d + i] -= c * f[i]
        prod[k] = 0
    return [x % m for x in prod[:d]]


def _poly_powmod(a: Sequence[int], e: int, f: Sequence[int], m: int) -> list[int]:
    d = len(f) - 1
    result = [1] + [0] * (d - 1)
    base = list(a)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, m)
        base = _poly_mulmod(base, base, f, m)
        e >>= 1
    return result


def _is_irreducible_mod_p(f: Sequence[int], p: int) -> bool:
    """Rabin-style test: f monic of degree d over F_p."""
    d = len(f) - 1
    if d == 1:
        return True
    x = [0, 1] + [0] * (d - 2)
    # x^{p^d} == x mod f, and gcd(x^{p^{d/q}} - x, f) == 1 for prime q | d
    if _poly_powmod(x, p ** d, f, p) != x:
        return False
    for q in range(2, d + 1):
        if d % q == 0 and is_prime(q):
            g = _poly_powmod(x, p ** (d // q), f, p)
            g = [(g[i] - x[i]) % p for i in range(d)]
            if _poly_trim(_gcd_mod_p(list(f), g, p)) != [1]:
                return False
    return True


def _gcd_mod_p(a: list[int], b: list[int], p: int) -> list[int]:
    a = _poly_trim([x % p for x in a])
    b = _poly_trim([x % p for x in b])
    while b:
        inv = pow(b[-1], -1, p)
        while len(a) >= len(b) and a:
            c = a[-1] * inv % p
            shift = len(a) - len(b)
            for i, bi in enumerate(b):
                a[shift + i] = (a[shift + i] - c * bi) % p
            _poly_trim(a)
        a, b = b, a
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


@lru_cache(maxsize=None)
def least_irreducible(p: int, d: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible polynomial of degree d over F_p.

    Order: compare coefficient vectors from the x^{d-1} coefficient down to
    the constant term.  Returned lowest degree first, including the leading 1.
    """
    for high_to_low in itertools.product(range(p), repeat=d):
        f = list(reversed(high_to_low)) + [1]
        if d > 1 and f[0] == 0:
            continue
        if _is_irreducible_mod_p(f, p):
            return tuple(f)
    raise PadicError(f"no irreducible polynomial of degree {d} over F_{p}")


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingConfig:
    """W(F_{p^d}) truncated at p-adic precision N."""

    p: int
    d: int = 1
    N: int = 8

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise PadicError(f"p={self.p!r} is not prime")
        if not isinstance(self.d, int) or self.d < 1:
            raise PadicError(f"residue degree d={self.d!r} must be >= 1")
        if not isinstance(self.N, int) or self.N < 1:
            raise PadicError(f"precision N={self.N!r} must be >= 1")

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    @property
    def q(self) -> int:
        return self.p ** self.d

    @cached_property
    def residue_poly(self) -> tuple[int, ...]:
        return least_irreducible(self.p, self.d)

    @cached_property
    def defining_poly(self) -> tuple[int, ...]:
        """Monic lift of residue_poly whose roots are Teichmuller elements."""
        p, d, m = self.p, self.d, self.modulus
        f0 = list(self.residue_poly)
        if d == 1:
            # t is the Teichmuller lift of the root -c0
            root = _teichmuller_int(-f0[0] % p, p, self.N)
            return ((-root) % m, 1)
        t = [0, 1] + [0] * (d - 2)
        for _ in range(self.N):
            t = _poly_powmod(t, self.q, f0, m)
        # conjugates t^{p^i}; multiply out prod (X - t^{p^i}) in A[X]
        conj = [t]
        for _ in range(d - 1):
            conj.append(_poly_powmod(conj[-1], p, f0, m))
        one = [1] + [0] * (d - 1)
        poly = [one]
        for c in conj:
            neg_c = [(-x) % m for x in c]
            new = [[0] * d for _ in range(len(poly) + 1)]
            for k, coeff in enumerate(poly):
                new[k + 1] = [(u + v) % m for u, v in zip(new[k + 1], coeff)]
                prod = _poly_mulmod(coeff, neg_c, f0, m)
                new[k] = [(u + v) % m for u, v in zip(new[k], prod)]
            poly = new
        out = []
        for coeff in poly:
            if any(coeff[1:]):
                raise PadicError("conjugate product did not descend to Z/p^N")
            out.append(coeff[0])
        return tuple(out)

    @cached_property
    def frobenius_matrix(self) -> tuple[tuple[int, ...], ...]:
        """Column j holds the coordinates of phi(t^j) = t^{pj}."""
        d, m, f = self.d, self.modulus, self.defining_poly
        if d == 1:
            return ((1,),)
        t = [0, 1] + [0] * (d - 2)
        tp = _poly_powmod(t, self.p, f, m)
        cols = []
        cur = [1] + [0] * (d - 1)
        for _ in range(d):
            cols.append(cur)
            cur = _poly_mulmod(cur, tp, f, m)
        return tuple(tuple(cols[j][i] for j in range(d)) for i in range(d))

    # constructors -------------------------------------------------------

    def element(self, coords: int | Iterable[int], prec: int | None = None) -> "WittElement":
        if isinstance(coords, int):
            coords = [coords] + [0] * (self.d - 1)
        coords = list(coords)
        if len(coords) != self.d:
            raise PadicError(f"expected {self.d} coordinates, got {len(coords)}")
        prec = self.N if prec is None else prec
        if prec < 1:
            raise PrecisionError("effective precision exhausted")
        mod = self.p ** prec
        return WittElement(self, tuple(c % mod for c in coords), prec)

    def zero(self) -> "WittElement":
        return self.element(0)

    def one(self) -> "WittElement":
        return self.element(1)

    def generator(self) -> "WittElement":
        """The Teichmuller root t of the defining polynomial (t = -c0 when d = 1)."""
        if self.d == 1:
            return self.element(-self.defining_poly[0])
        return self.element([0, 1] + [0] * (self.d - 2))

    def random_element(self, rng: random.Random) -> "WittElement":
        return self.element([rng.randrange(self.modulus) for _ in range(self.d)])

    def random_unit(self, rng: random.Random) -> "WittElement":
        while True:
            a = self.random_element(rng)
            if a.is_unit():
                return a

    def residue_field(self) -> "ResidueField":
        return ResidueField(self.p, self.d)

    def to_json(self) -> dict:
        return {"p": self.p, "d": self.d, "N": self.N}

    @classmethod
    def from_json(cls, obj: dict) -> "RingConfig":
        try:
            return cls(int(obj["p"]), int(obj["d"]), int(obj["N"]))
        except (KeyError, TypeError) as exc:
            raise PadicError(f"malformed ring: {obj!r}") from exc


def make_ring(p: int, d: int = 1, N: int = 8) -> RingConfig:
    ring = RingConfig(p, d, N)
    ring.defining_poly, ring.frobenius_matrix  # noqa: B018 - force precomputation
    return ring


def _teichmuller_int(x: int, p: int, N: int) -> int:
    m = p ** N
    y = x % m
    for _ in range(N):
        y = pow(y, p, m)
    return y


@dataclass(frozen=True, eq=False)
class WittElement:
    """Element of W(F_{p^d}) known modulo p^prec (prec <= N)."""

    ring: RingConfig
    coords: tuple[int, ...]
    prec: int

    def _check(self, other: "WittElement") -> None:
        if not isinstance(other, WittElement) or other.ring != self.ring:
            raise PadicError("operands live in different rings")

    def _new(self, coords: Iterable[int], prec: int) -> "WittElement":
        mod = self.ring.p ** prec
        return WittElement(self.ring, tuple(c % mod for c in coords), prec)

    def _coerce(self, other) -> "WittElement":
        if isinstance(other, int):
            return self.ring.element(other)
        self._check(other)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        return self._new((a + b for a, b in zip(self.coords, other.coords)), min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return self._new((-a for a in self.coords), self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        prec = min(self.prec, other.prec)
        if self.ring.d == 1:
            return self._new((self.coords[0] * other.coords[0],), prec)
        prod = _poly_mulmod(self.coords, other.coords, self.ring.defining_poly, self.ring.modulus)
        return self._new(prod, prec)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        result = self.ring.element(1, self.prec)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.element(other)
        if not isinstance(other, WittElement) or other.ring != self.ring:
            return NotImplemented
        mod = self.ring.p ** min(self.prec, other.prec)
        return all((a - b) % mod == 0 for a, b in zip(self.coords, other.coords))

    __hash__ = None  # equality is precision dependent

    def __repr__(self):
        if self.ring.d == 1:
            return f"W({self.coords[0]} mod {self.ring.p}^{self.prec})"
        return f"W({list(self.coords)} mod {self.ring.p}^{self.prec})"

    def is_zero(self) -> bool:
        return not any(self.coords)

    def valuation(self) -> int:
        """p-adic valuation, capped at prec."""
        v = self.prec
        for c in self.coords:
            if c:
                k = 0
                while c % self.ring.p == 0:
                    c //= self.ring.p
                    k += 1
                v = min(v, k)
        return v

    def reduce(self) -> "ResidueElement":
        return ResidueElement(ResidueField(self.ring.p, self.ring.d), tuple(c % self.ring.p for c in self.coords))

    def is_unit(self) -> bool:
        return any(c % self.ring.p for c in self.coords)

    def inv(self) -> "WittElement":
        if not self.is_unit():
            raise NotAUnitError(f"{self!r} is not a unit")
        ring = self.ring
        if ring.d == 1:
            return self._new((pow(self.coords[0], -1, ring.p ** self.prec),), self.prec)
        field_ = ResidueField(ring.p, ring.d)
        b = ring.element(field_.to_coords(field_.inv(self.reduce().code)), self.prec)
        # Newton: b <- b (2 - a b), doubling correct digits
        k = 1
        while k < self.prec:
            b = b * (2 - self * b)
            k *= 2
        return b

    def __truediv__(self, other):
        return self * self._coerce(other).inv()

    def div_p(self, times: int = 1) -> "WittElement":
        """Exact division by p^times; loses `times` digits of precision."""
        if times == 0:
            return self
        p = self.ring.p
        pk = p ** times
        new_prec = self.prec - times
        if new_prec < 1:
            raise PrecisionError(f"dividing {self!r} by {p}^{times} exhausts precision")
        if any(c % pk for c in self.coords):
            raise DivisibilityError(f"{self!r} is not divisible by {p}^{times}")
        return self._new((c // pk for c in self.coords), new_prec)

    def frobenius(self, power: int = 1) -> "WittElement":
        ring = self.ring
        if ring.d == 1:
            return self
        power %= ring.d
        mat, m = ring.frobenius_matrix, ring.modulus
        v = self.coords
        for _ in range(power):
            v = tuple(sum(mat[i][j] * v[j] for j in range(ring.d)) % m for i in range(ring.d))
        return self._new(v, self.prec)

    def frobenius_inv(self, power: int = 1) -> "WittElement":
        return self.frobenius(-power % self.ring.d)

    def norm(self) -> "WittElement":
        result = self
        conj = self
        for _ in range(self.ring.d - 1):
            conj = conj.frobenius()
            result = result * conj
        return result

    def to_json(self) -> dict:
        out = {"coords": list(self.coords)}
        if self.prec < self.ring.N:
            out["prec"] = self.prec
        return out


def teichmuller(ring: RingConfig, x: "ResidueElement | int | Sequence[int]") -> WittElement:
    """The unique lift w of x with w^{p^d} = w."""
    if isinstance(x, ResidueElement):
        coords = x.coords
    elif isinstance(x, int):
        coords = (x,) + (0,) * (ring.d - 1)
    else:
        coords = tuple(x)
    w = ring.element(coords)
    for _ in range(ring.N):
        w = w ** ring.q
    return w


def frobenius(a: WittElement) -> WittElement:
    return a.frobenius()


def norm(a: WittElement) -> WittElement:
    return a.norm()


def witt_from_json(ring: RingConfig, obj) -> WittElement:
    if isinstance(obj, int):
        return ring.element(obj)
    try:
        coords = obj["coords"]
        prec = obj.get("prec", ring.N)
    except (KeyError, TypeError, AttributeError) as exc:
        raise PadicError(f"malformed Witt element: {obj!r}") from exc
    if not isinstance(coords, list) or len(coords) != ring.d or not all(isinstance(c, int) for c in coords):
        raise PadicError(f"malformed Witt element: {obj!r}")
    if not isinstance(prec, int) or not 1 <= prec <= ring.N:
        raise PadicError(f"bad precision in Witt element: {obj!r}")
    if any(not 0 <= c < ring.p ** prec for c in coords):
        raise PadicError(f"coordinates out of range in {obj!r}")
    return ring.element(coords, prec)


# ---------------------------------------------------------------------------
# residue field F_{p^d}; elements are encoded as ints sum c_i p^i

class ResidueField:
    """F_{p^d} with the same defining polynomial as the matching Witt ring."""

    _cache: dict[tuple[int, int], "ResidueField"] = {}

    def __new__(cls, p: int, d: int = 1):
        key = (p, d)
        inst = cls._cache.get(key)
        if inst is None:
            inst = super().__new__(cls)
            inst._init(p, d)
            cls._cache[key] = inst
        return inst

    def _init(self, p: int, d: int) -> None:
        if not is_prime(p) or d < 1:
            raise PadicError(f"bad field parameters p={p}, d={d}")
        self.p = p
        self.d = d
        self.q = p ** d
        self.poly = least_irreducible(p, d)
        self._mul_table: list[list[int]] | None = None

    def __reduce__(self):
        return (ResidueField, (self.p, self.d))

    def __repr__(self):
        return f"GF({self.p}^{self.d})" if self.d > 1 else f"GF({self.p})"

    def to_coords(self, a: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.d):
            out.append(a % self.p)
            a //= self.p
        return tuple(out)

    def from_coords(self, coords: Sequence[int]) -> int:
        a = 0
        for c in reversed(coords):
            a = a * self.p + c % self.p
        return a

    def add(self, a: int, b: int) -> int:
        if self.d == 1:
            return (a + b) % self.p
        return self.from_coords([x + y for x, y in zip(self.to_coords(a), self.to_coords(b))])

    def neg(self, a: int) -> int:
        if self.d == 1:
            return -a % self.p
        return self.from_coords([-x for x in self.to_coords(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def _table(self) -> list[list[int]]:
        if self._mul_table is None:
            q = self.q
            table = [[0] * q for _ in range(q)]
            for a in range(q):
                ca = self.to_coords(a)
                for b in range(a, q):
                    c = self.from_coords(_poly_mulmod(ca, self.to_coords(b), self.poly, self.p))
                    table[a][b] = table[b][a] = c
            self._mul_table = table
        return self._mul_table

    def mul(self, a: int, b: int) -> int:
        if self.d == 1:
            return a * b % self.p
        return self._table()[a][b]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise NotAUnitError("0 is not invertible")
        if self.d == 1:
            return pow(a, -1, self.p)
        return self.pow(a, self.q - 2)

    def frob(self, a: int, power: int = 1) -> int:
        return self.pow(a, self.p ** (power % self.d))

    def elements(self) -> range:
        return range(self.q)

    def scalar(self, n: int) -> int:
        return n % self.p

    def element_to_json(self, a: int):
        return a if self.d == 1 else list(self.to_coords(a))

    def element_from_json(self, obj) -> int:
        if isinstance(obj, int):
            if self.d == 1:
                return obj % self.p
            if 0 <= obj < self.q:
                return obj
        elif isinstance(obj, list) and len(obj) == self.d and all(isinstance(c, int) for c in obj):
            return self.from_coords(obj)
        raise PadicError(f"malformed field element {obj!r} for {self!r}")


@dataclass(frozen=True)
class ResidueElement:
    field: ResidueField = field(compare=False)
    coords: tuple[int, ...]

    @property
    def code(self) -> int:
        return self.field.from_coords(self.coords)

    def __mul__(self, other: "ResidueElement") -> "ResidueElement":
        return ResidueElement(self.field, self.field.to_coords(self.field.mul(self.code, other.code)))

    def __add__(self, other: "ResidueElement") -> "ResidueElement":
        return ResidueElement(self.field, self.field.to_coords(self.field.add(self.code, other.code)))

    def __pow__(self, e: int) -> "ResidueElement":
        return ResidueElement(self.field, self.field.to_coords(self.field.pow(self.code, e)))

    def is_zero(self) -> bool:
        return not any(self.coords)
