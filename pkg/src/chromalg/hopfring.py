"""Symbolic Hopf-ring arithmetic and the u^p = 0 proof-replay verifier.

Model.  A term is a *-product of atoms with F_p[v_n^{+-1}] scalars.  An atom
is [m] o b_{i_1} o ... o b_{i_k} with m a monomial in v_1..v_h and all
i_j > 0; with k = 0 it is the group-like ring-ring element [m], which may
carry a negative *-exponent.  b_0 is the *-unit [0] (empty product), so
b_0 o b_j = 0 for j > 0 and x o [0] = eps(x) [0].

Q-mode is the module of *-indecomposables: anything with two augmentation
ideal factors dies, g * a == a for group-like g, and a bare group-like [m]
is recorded as q([m]) = [m] - [0].  "mod [I_r]" is applied at the
coefficient level: atoms whose monomial involves v_1..v_{r-1} are dropped.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Sequence

from . import bp
from .bp import GradedPoly, nu
from .padic import is_prime

log = logging.getLogger(__name__)

Mono = tuple  # exponents of v_1..v_h
Atom = tuple  # (mono, bidx)
StarMono = tuple  # ((atom, mult), ...) sorted


class HopfError(ValueError):
    pass


class AntipodeError(HopfError):
    """o-product of an inverse group-like with a b-atom: needs the antipode."""


# ---------------------------------------------------------------------------
# star monomials

def _sm_from_counts(counts: dict) -> StarMono:
    return tuple(sorted((a, e) for a, e in counts.items() if e))


def _sm_mul(s: StarMono, t: StarMono) -> StarMono:
    if not s:
        return t
    if not t:
        return s
    counts = dict(s)
    for a, e in t:
        counts[a] = counts.get(a, 0) + e
    return _sm_from_counts(counts)


def _sm_pow(s: StarMono, e: int) -> StarMono:
    return _sm_from_counts({a: m * e for a, m in s})


def _is_ring_atom(a: Atom) -> bool:
    return not a[1]


def _sm_grouplike(s: StarMono) -> bool:
    return all(_is_ring_atom(a) for a, _ in s)


def _sm_count(s: StarMono) -> int:
    return sum(abs(e) for _, e in s)


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Ordered k-tuples of positive ints summing to n."""
    if k == 1:
        if n >= 1:
            yield (n,)
        return
    for first in range(1, n - k + 2):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def _split_atom(atom: Atom, N: int) -> Iterator[tuple]:
    """N-fold iterated coproduct of a b-atom, one tuple of slots per term.

    Each index splits as b_i -> sum b_{j_1} (x) ... (x) b_{j_N}.  A slot that
    receives a mix of zero and positive indices vanishes (b_0 o b_j = 0),
    an all-zero slot is the unit (None).
    """
    mono, bidx = atom
    for size in range(1, N + 1):
        for active in _subsets(N, size):
            for parts in product(*(list(_compositions(i, size)) for i in bidx)):
                slots: list = [None] * N
                for pos, slot in enumerate(active):
                    slots[slot] = (mono, tuple(sorted(part[pos] for part in parts)))
                yield tuple(slots)


def _subsets(N: int, size: int) -> Iterator[tuple[int, ...]]:
    from itertools import combinations

    return combinations(range(N), size)


# ---------------------------------------------------------------------------

class HopfRing:
    """Arithmetic over F_p for the Hopf ring with v_1..v_h ring-ring symbols."""

    def __init__(self, p: int, h: int, n: int | None = None):
        if not is_prime(p):
            raise HopfError(f"{p} is not prime")
        if h < 0:
            raise HopfError("h must be >= 0")
        self.p, self.h, self.n = p, h, n
        self._circ_cache: dict = {}
        self._cop_cache: dict = {}

    # -- constructors -------------------------------------------------------
    def zero_mono(self) -> Mono:
        return (0,) * self.h

    def expr(self, terms: dict | None = None, mode: str = "full", level: int = 0) -> "HopfExpr":
        return HopfExpr(self, terms or {}, mode, level)

    def zero(self) -> "HopfExpr":
        return self.expr()

    def unit(self) -> "HopfExpr":
        """[0], the *-unit (also b_0)."""
        return self.expr({(0, ()): 1})

    def sym(self, mono: Mono, mult: int = 1) -> "HopfExpr":
        return self.expr({(0, _sm_from_counts({(tuple(mono), ()): mult})): 1})

    def integer(self, k: int) -> "HopfExpr":
        """[k] = [1]^{*k}."""
        return self.sym(self.zero_mono(), k) if k else self.unit()

    def v(self, i: int) -> "HopfExpr":
        """[v_i]; [v_0] = [p] and [v_i] = [0] for i > h."""
        if i == 0:
            return self.integer(self.p)
        if i > self.h:
            return self.unit()
        e = [0] * self.h
        e[i - 1] = 1
        return self.sym(tuple(e))

    def b(self, *indices: int) -> "HopfExpr":
        """b_{i_1} o ... o b_{i_k}; any zero index gives b_0 = [0] behaviour."""
        if any(i < 0 for i in indices):
            raise HopfError("negative b index")
        if not indices:
            raise HopfError("b() needs at least one index")
        if all(i == 0 for i in indices):
            return self.unit()
        if any(i == 0 for i in indices):
            return self.zero()
        return self.expr({(0, (((self.zero_mono(), tuple(sorted(indices))), 1),)): 1})

    def bpow(self, i: int, k: int) -> "HopfExpr":
        """b_i^{o k} (k >= 1); k = 0 gives the o-unit [1]."""
        if k == 0:
            return self.integer(1)
        return self.b(*([i] * k))

    def vn(self, power: int) -> "HopfExpr":
        return self.expr({(power, ()): 1})

    # -- bidegrees ---------------------------------------------------------
    def mono_degree(self, m: Mono) -> int:
        return sum(2 * (self.p ** (i + 1) - 1) * e for i, e in enumerate(m))

    def atom_bidegree(self, a: Atom) -> tuple[int, int]:
        mono, bidx = a
        return (-self.mono_degree(mono) + 2 * len(bidx), 2 * sum(bidx))

    def term_bidegree(self, key) -> tuple[int | None, int]:
        vn_exp, sm = key
        vn_deg = 2 * (self.p ** self.n - 1) * vn_exp if self.n else 0
        spaces = {self.atom_bidegree(a)[0] for a, _ in sm}
        if len(spaces) > 1:
            raise HopfError(f"*-product of factors in different spaces: {sorted(spaces)}")
        hom = sum(e * self.atom_bidegree(a)[1] for a, e in sm) + vn_deg
        return (spaces.pop() if spaces else None, hom)

    # -- coproduct ---------------------------------------------------------
    def coproduct_mono(self, s: StarMono) -> dict:
        """Delta(s) as {(s1, s2): coeff}; Delta is *-multiplicative."""
        hit = self._cop_cache.get(s)
        if hit is not None:
            return hit
        p = self.p
        acc: dict = {((), ()): 1}
        for a, e in s:
            if _is_ring_atom(a):
                g = ((a, e),)
                acc = {(_sm_mul(l, g), _sm_mul(r, g)): c for (l, r), c in acc.items()}
                continue
            da: dict = {}
            for left, right in _split_atom(a, 2):
                key = (((left, 1),) if left else (), ((right, 1),) if right else ())
                da[key] = (da.get(key, 0) + 1) % p
            for _ in range(e):
                nxt: dict = {}
                for (l1, r1), c1 in acc.items():
                    for (l2, r2), c2 in da.items():
                        key = (_sm_mul(l1, l2), _sm_mul(r1, r2))
                        nxt[key] = (nxt.get(key, 0) + c1 * c2) % p
                acc = {k: c for k, c in nxt.items() if c}
        self._cop_cache[s] = acc
        return acc

    @staticmethod
    def counit_mono(s: StarMono) -> int:
        return 1 if _sm_grouplike(s) else 0

    # -- products ------------------------------------------------------------
    def _star_dicts(self, x: dict, y: dict) -> dict:
        p = self.p
        out: dict = {}
        for s, a in x.items():
            for t, b in y.items():
                k = _sm_mul(s, t)
                out[k] = (out.get(k, 0) + a * b) % p
        return {k: c for k, c in out.items() if c}

    def circ_mono(self, s: StarMono, t: StarMono) -> dict:
        key = (s, t) if s <= t else (t, s)  # o is commutative in even degrees
        hit = self._circ_cache.get(key)
        if hit is None:
            hit = self._circ_mono(*key)
            self._circ_cache[key] = hit
        return hit

    def _circ_mono(self, s: StarMono, t: StarMono) -> dict:
        p = self.p
        if not s:
            return {(): 1} if self.counit_mono(t) else {}
        if not t:
            return {(): 1} if self.counit_mono(s) else {}
        if _sm_grouplike(s):
            return self._grouplike_circ(s, t)
        if _sm_grouplike(t):
            return self._grouplike_circ(t, s)
        cs, ct = _sm_count(s), _sm_count(t)
        if cs == 1 and ct == 1:
            (a, _), = s
            (b, _), = t
            fused = (tuple(x + y for x, y in zip(a[0], b[0])), tuple(sorted(a[1] + b[1])))
            return {((fused, 1),): 1}
        if ct == 1:
            s, t = t, s
        # now t has at least two factors: t = t1 * rest
        t1 = ((t[0][0], 1),)
        rest = _sm_mul(t, ((t[0][0], -1),))
        out: dict = {}
        for (s1, s2), c in self.coproduct_mono(s).items():
            left = self.circ_mono(s1, t1)
            if not left:
                continue
            right = self.circ_mono(s2, rest)
            if not right:
                continue
            for k, v in self._star_dicts(left, right).items():
                out[k] = (out.get(k, 0) + c * v) % p
        return {k: v for k, v in out.items() if v}

    def _grouplike_circ(self, g: StarMono, t: StarMono) -> dict:
        """g o t for group-like g: a *-homomorphism in t."""
        acc: dict = {(): 1}
        for a, e in t:
            piece = self._grouplike_circ_atom(g, a)
            if e < 0:
                if len(piece) != 1 or not _sm_grouplike(next(iter(piece))):
                    raise AntipodeError("inverse of a non-group-like element")
                (sm, _), = piece.items()
                piece = {_sm_pow(sm, -1): 1}
                e = -e
            for _ in range(e):
                acc = self._star_dicts(acc, piece)
        return acc

    def _grouplike_circ_atom(self, g: StarMono, a: Atom) -> dict:
        if _is_ring_atom(a):
            counts: dict = {}
            for (m, _), e in g:
                key = (tuple(x + y for x, y in zip(m, a[0])), ())
                counts[key] = counts.get(key, 0) + e
            return {_sm_from_counts(counts): 1}
        if any(e < 0 for _, e in g):
            raise AntipodeError("o-product of an inverse ring-ring element with b's needs the antipode")
        gs = [m for (m, _), e in g for _ in range(e)]
        p = self.p
        out: dict = {}
        for slots in _split_atom(a, len(gs)):
            counts: dict = {}
            for gm, piece in zip(gs, slots):
                if piece is not None:
                    key = (tuple(x + y for x, y in zip(gm, piece[0])), piece[1])
                    counts[key] = counts.get(key, 0) + 1
            sm = _sm_from_counts(counts)
            out[sm] = (out.get(sm, 0) + 1) % p
        return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------

@dataclass(eq=False)
class HopfExpr:
    ring: HopfRing
    terms: dict  # (vn_exp, starmono) -> coeff in F_p
    mode: str = "full"
    level: int = 0

    def __post_init__(self):
        p = self.ring.p
        self.terms = {k: c % p for k, c in self.terms.items() if c % p}

    def _like(self, terms: dict) -> "HopfExpr":
        return HopfExpr(self.ring, terms, self.mode, self.level)

    def _check(self, other: "HopfExpr") -> None:
        if other.ring is not self.ring:
            raise HopfError("expressions from different rings")
        if other.mode != self.mode:
            raise HopfError(f"cannot combine {self.mode} and {other.mode} expressions")

    def __add__(self, other: "HopfExpr") -> "HopfExpr":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return self._like(out)

    def __neg__(self) -> "HopfExpr":
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "HopfExpr") -> "HopfExpr":
        return self + (-other)

    def scale(self, c: int) -> "HopfExpr":
        return self._like({k: c * v for k, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, HopfExpr) and self.ring is other.ring and self.mode == other.mode and self.terms == other.terms

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def counit(self) -> int:
        return sum(c for (vn_exp, s), c in self.terms.items() if vn_exp == 0 and _sm_grouplike(s)) % self.ring.p

    def bidegrees(self) -> set:
        return {self.ring.term_bidegree(k) for k in self.terms}

    def to_json(self) -> list:
        return ["+"] + [[c, vn_exp, _sm_json(self.ring, s, self.mode)] for (vn_exp, s), c in sorted(self.terms.items())]

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}" + (f"*vn^{v}" if v else "") + f"*{_sm_str(self.ring, s, self.mode)}" for (v, s), c in sorted(self.terms.items()))


def _mono_key(ring: HopfRing, m: Mono) -> str:
    return GradedPoly(ring.p, ring.h).monomial_key(m)


def _atom_json(ring: HopfRing, a: Atom) -> list:
    mono, bidx = a
    bs = [["b", i] for i in bidx]
    sym = ["sym", _mono_key(ring, mono)]
    if not bs:
        return sym
    if not any(mono) and len(bs) == 1:
        return bs[0]
    return ["o"] + ([] if not any(mono) else [sym]) + bs


def _sm_json(ring: HopfRing, s: StarMono, mode: str) -> list:
    factors = []
    for a, e in s:
        f = _atom_json(ring, a)
        if mode == "Q" and _is_ring_atom(a):
            f = ["q", f]
        if e < 0:
            f = ["inv", f]
        factors.extend([f] * abs(e))
    if len(factors) == 1:
        return factors[0]
    return ["*"] + factors


def _sm_str(ring: HopfRing, s: StarMono, mode: str) -> str:
    def atom(a):
        mono, bidx = a
        parts = ([f"[{_mono_key(ring, mono)}]"] if any(mono) or not bidx else []) + [f"b{i}" for i in bidx]
        txt = "o".join(parts)
        return f"q({txt})" if mode == "Q" and not bidx else txt
    if not s:
        return "[0]"
    return "*".join(atom(a) + (f"^{e}" if e != 1 else "") for a, e in s)


# ---------------------------------------------------------------------------
# operations on expressions

def star(x: HopfExpr, y: HopfExpr) -> HopfExpr:
    x._check(y)
    if x.mode == "Q":
        raise HopfError("star is not defined on indecomposables")
    ring = x.ring
    out: dict = {}
    for (v1, s), a in x.terms.items():
        for (v2, t), b in y.terms.items():
            k = (v1 + v2, _sm_mul(s, t))
            out[k] = out.get(k, 0) + a * b
    res = x._like(out)
    for k in res.terms:
        ring.term_bidegree(k)  # raises on a space mismatch
    return res


def star_power(x: HopfExpr, e: int) -> HopfExpr:
    out = x.ring.unit()
    for _ in range(e):
        out = star(out, x)
    return out


def circ(x: HopfExpr, y: HopfExpr) -> HopfExpr:
    x._check(y)
    if x.mode == "Q":
        raise HopfError("circ is computed in full mode; reduce afterwards")
    ring = x.ring
    out: dict = {}
    for (v1, s), a in x.terms.items():
        for (v2, t), b in y.terms.items():
            for sm, c in ring.circ_mono(s, t).items():
                k = (v1 + v2, sm)
                out[k] = out.get(k, 0) + a * b * c
    return x._like(out)


def circ_all(*xs: HopfExpr) -> HopfExpr:
    acc = xs[0]
    for x in xs[1:]:
        acc = circ(acc, x)
    return acc


def coproduct(x: HopfExpr) -> dict:
    """{(vn_exp, s1, s2): coeff}, v_n split to the left (it is a scalar)."""
    out: dict = {}
    for (v, s), a in x.terms.items():
        for (s1, s2), c in x.ring.coproduct_mono(s).items():
            k = (v, s1, s2)
            out[k] = (out.get(k, 0) + a * c) % x.ring.p
    return {k: c for k, c in out.items() if c}


def is_primitive(x: HopfExpr) -> bool:
    want: dict = {}
    for (v, s), a in x.terms.items():
        for k in ((v, s, ()), (v, (), s)):
            want[k] = (want.get(k, 0) + a) % x.ring.p
    return coproduct(x) == {k: c for k, c in want.items() if c}


def _kill_ideal(mono: Mono, level: int) -> bool:
    return any(mono[i] for i in range(min(level - 1, len(mono))))


def q_reduce(x: HopfExpr, level: int = 0) -> HopfExpr:
    """Image in the indecomposables, with coefficients mod I_level."""
    if x.mode == "Q":
        if level < x.level:
            raise HopfError("cannot lift a Q expression to a smaller ideal")
    ring = x.ring
    out: dict = {}

    def add(key, c):
        out[key] = out.get(key, 0) + c

    for (v, s), c in x.terms.items():
        b_atoms = [(a, e) for a, e in s if not _is_ring_atom(a)]
        nb = sum(e for _, e in b_atoms)
        if nb >= 2:
            continue
        if nb == 1:
            a = b_atoms[0][0]
            if not _kill_ideal(a[0], level):
                add((v, ((a, 1),)), c)
            continue
        for a, e in s:  # q(prod g^e) = sum e q(g)
            if not _kill_ideal(a[0], level) and any(a[0]):
                add((v, ((a, 1),)), c * e)
    return HopfExpr(ring, out, "Q", level)


def in_span(x: HopfExpr, relations: Sequence[HopfExpr]) -> tuple[bool, list[int]]:
    """Solve x = sum c_i rel_i over F_p (Q-mode vectors); returns (ok, c)."""
    p = x.ring.p
    keys = sorted(set(x.terms).union(*(r.terms for r in relations)))
    idx = {k: i for i, k in enumerate(keys)}
    m = len(relations)
    # augmented matrix rows = coordinates, columns = relations | x
    rows = [[0] * (m + 1) for _ in keys]
    for j, r in enumerate(relations):
        for k, c in r.terms.items():
            rows[idx[k]][j] = c % p
    for k, c in x.terms.items():
        rows[idx[k]][m] = c % p
    pivots = []
    row = 0
    for col in range(m):
        piv = next((i for i in range(row, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[row], rows[piv] = rows[piv], rows[row]
        inv = pow(rows[row][col], -1, p)
        rows[row] = [v * inv % p for v in rows[row]]
        for i in range(len(rows)):
            if i != row and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[row])]
        pivots.append(col)
        row += 1
    if any(r[m] for r in rows[row:]):
        return False, []
    coeffs = [0] * m
    for i, col in enumerate(pivots):
        coeffs[col] = rows[i][m]
    return True, coeffs


# ---------------------------------------------------------------------------
# Ravenel-Wilson relation

@dataclass(frozen=True)
class ReductionContext:
    p: int
    h: int
    n: int
    mode: str = "Q"

    def __post_init__(self):
        if not is_prime(self.p):
            raise HopfError(f"{self.p} is not prime")
        if self.h < 0:
            raise HopfError("h must be >= 0")
        if self.n <= self.h + 1:
            raise HopfError(f"need n > h + 1, got n={self.n}, h={self.h}")
        if self.mode not in ("Q", "full"):
            raise HopfError(f"unknown mode {self.mode!r}")

    @property
    def degree_bound(self) -> int:
        return self.p ** (self.h + 2)


_rings: dict = {}


def ring_for(p: int, h: int, n: int) -> HopfRing:
    key = (p, h, n)
    if key not in _rings:
        _rings[key] = HopfRing(p, h, n)
    return _rings[key]


@dataclass
class Identity:
    lhs: HopfExpr
    rhs: HopfExpr
    mode: str
    level: int
    k: int
    notes: list = field(default_factory=list)

    def difference(self) -> HopfExpr:
        return self.rhs - self.lhs

    def bidegree(self) -> tuple:
        degs = self.lhs.bidegrees() | self.rhs.bidegrees()
        spaces = {s for s, _ in degs if s is not None}
        homs = {t for _, t in degs}
        if len(spaces) > 1 or len(homs) > 1:
            raise HopfError(f"identity at s^{self.k} is not bidegree-homogeneous: {sorted(degs, key=str)}")
        return (spaces.pop() if spaces else None, homs.pop() if homs else None)

    def to_json(self) -> dict:
        return {"k": self.k, "mode": self.mode, "level": self.level,
                "lhs": self.lhs.to_json(), "rhs": self.rhs.to_json(), "notes": self.notes}


def _multiset_orderings(parts: Sequence[int]) -> int:
    out = math.factorial(len(parts))
    for v in set(parts):
        out //= math.factorial(parts.count(v))
    return out


def _partitions(k: int, i: int, min_part: int = 1) -> Iterator[tuple[int, ...]]:
    """Non-decreasing i-tuples of positive ints summing to k."""
    if i == 0:
        if k == 0:
            yield ()
        return
    for first in range(min_part, k // i + 1):
        for rest in _partitions(k - first, i - 1, first):
            yield (first,) + rest


def b_circ_power_coeff(ring: HopfRing, i: int, k: int) -> HopfExpr:
    """Coefficient of s^k in b(s)^{o i} (full mode; only all-positive tuples survive)."""
    if k == 0:
        return ring.unit()
    terms = {}
    for parts in _partitions(k, i):
        c = _multiset_orderings(parts) % ring.p
        if c:
            terms[(0, (((ring.zero_mono(), parts), 1),))] = c
    return ring.expr(terms)


def rw_lhs(ring: HopfRing, n: int, k: int) -> HopfExpr:
    """Coefficient of s^k in b(v_n s^{p^n})."""
    q = ring.p ** n
    if k == 0:
        return ring.unit()
    if k % q:
        return ring.zero()
    j = k // q
    return circ(ring.vn(j), ring.b(j))


def rw_extract(ctx: ReductionContext, r: int, k: int) -> Identity:
    """Coefficient of s^k in b([p]_{K(n)}(s)) = [p]_{[BP<h>]}(b(s)), reduced per ctx.

    The right side is the *-product over i of [a_i] o b(s)^{o i}, where the a_i
    are the coefficients of [p](x) written as a formal-group sum.
    """
    if not 0 <= r <= ctx.h:
        raise HopfError(f"need 0 <= r <= h, got r={r}")
    if k < 1:
        raise HopfError("k must be >= 1")
    D = ctx.degree_bound
    if k > D:
        raise HopfError(f"s-degree {k} exceeds the available bp degree {D}")
    ring = ring_for(ctx.p, ctx.h, ctx.n)
    a = bp.fsum_coefficients(ctx.p, ctx.h, r, D)
    lhs = rw_lhs(ring, ctx.n, k)
    if ctx.mode == "Q":
        rhs = ring.zero()
        for i, g in sorted(a.items()):
            if i > k:
                break
            y = b_circ_power_coeff(ring, i, k)
            for mono, lam in sorted(g.terms.items()):
                rhs = rhs + circ(ring.sym(mono), y).scale(lam)
        ident = Identity(q_reduce(lhs, r), q_reduce(rhs, r), "Q", r, k)
    else:
        if r != 0:
            raise HopfError("full-mode extraction is only implemented without an ideal")
        ident = Identity(lhs, _full_rhs(ring, a, k), "full", 0, k,
                         notes=[f"a_i = 0 for 1 < i < {ctx.p} by degree", "a_1 = p exactly"])
    ident.bidegree()
    return ident


def _full_rhs(ring: HopfRing, a: dict, k: int) -> HopfExpr:
    """Full-mode coefficient of s^k; only safe where each [a_i] o y has y primitive."""
    p = ring.p
    series = []
    # [p] o b(s) = b(s)^{*p}, exact since a_1 = p integrally
    series.append([ring.unit()] + [circ(ring.integer(p), ring.b(j)) for j in range(1, k + 1)])
    for i in range(2, k + 1):
        g = a.get(i)
        if i < p:
            if g:
                raise HopfError(f"a_{i} nonzero below degree 2(p-1): impossible by grading")
            continue
        col = [ring.unit()] + [ring.zero()] * k
        for j in range(i, k + 1):
            y = b_circ_power_coeff(ring, i, j)
            if y.is_zero():
                continue
            if not is_primitive(y):
                raise HopfError(f"full-mode [a_{i}] o (b(s)^(o {i}))_{j} needs integral coefficients")
            term = ring.zero()
            for mono, lam in sorted((g.terms if g else {}).items()):
                term = term + circ(ring.sym(mono), y).scale(lam)
            col[j] = term
        series.append(col)
    acc = series[0]
    for col in series[1:]:
        nxt = [ring.zero()] * (k + 1)
        for d1 in range(k + 1):
            if acc[d1].is_zero():
                continue
            for d2 in range(k + 1 - d1):
                if not col[d2].is_zero():
                    nxt[d1 + d2] = nxt[d1 + d2] + star(acc[d1], col[d2])
        acc = nxt
    return acc[k]


# ---------------------------------------------------------------------------
# the lifting lemma

@dataclass
class SideCondition:
    name: str
    holds: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "holds": self.holds, "detail": self.detail}


def bi_power_instance(ctx: ReductionContext, j: int) -> tuple[HopfExpr, Identity, bool]:
    """[v_j] o b_1^{o p^j} in Q mod [I_j], checked against the s^{p^j} relation."""
    ring = ring_for(ctx.p, ctx.h, ctx.n)
    x = circ(ring.v(j), ring.bpow(1, ctx.p ** j))
    ident = rw_extract(ReductionContext(ctx.p, ctx.h, ctx.n, "Q"), j, ctx.p ** j)
    ok, _ = in_span(q_reduce(x, j), [ident.difference()])
    return x, ident, ok


def lift_rule(ctx: ReductionContext, x: HopfExpr, k: int, r: int,
              relations: Sequence[Identity] = ()) -> list[SideCondition]:
    """Certify x o b_1^{o k} = 0 in full mode; raises if a side condition fails."""
    if not 0 <= r <= ctx.h:
        raise HopfError(f"need 0 <= r <= h, got r={r}")
    need = nu(ctx.p, r - 1)
    if k < need:
        raise HopfError(f"side condition k >= nu(r-1) violated: k={k}, nu({r - 1})={need}")
    if k < 1:
        raise HopfError("side condition k >= 1 violated")
    conds = [SideCondition("k >= nu(r-1)", True, f"k={k}, nu({r - 1})={need}")]
    if x.counit():
        raise HopfError("x is not in the augmentation ideal")
    conds.append(SideCondition("x in augmentation ideal", True))
    qx = q_reduce(x, r)
    ok, coeffs = in_span(qx, [rel.difference() for rel in relations])
    if not ok:
        raise HopfError("Q-vanishing mod [I_r] not established from the supplied relations")
    conds.append(SideCondition("Q(x) = 0 mod [I_r]", True,
                               "trivially" if qx.is_zero() else f"combination {coeffs} of relations at s^{[rel.k for rel in relations]}"))
    for j in range(1, r):
        _, ident, good = bi_power_instance(ctx, j)
        if not good:
            raise HopfError(f"supporting instance [v_{j}] o b_1^(o {ctx.p ** j}) = 0 in Q mod [I_{j}] failed")
        conds.append(SideCondition(f"[v{j}] o b1^(o {ctx.p ** j}) = 0 in Q mod [I_{j}]", True, f"relation at s^{ident.k}"))
    return conds


# ---------------------------------------------------------------------------
# the certificate

@dataclass
class Step:
    lhs: HopfExpr
    rhs: HopfExpr
    rule: str
    side_conditions: list
    status: str

    def to_json(self) -> dict:
        return {"lhs": self.lhs.to_json(), "rhs": self.rhs.to_json(), "rule": self.rule,
                "side_conditions": [c.to_json() for c in self.side_conditions], "status": self.status}


@dataclass
class Certificate:
    params: dict
    steps: list
    verdict: str

    def to_json(self) -> dict:
        return {"params": self.params, "steps": [s.to_json() for s in self.steps], "verdict": self.verdict}

    def dumps(self) -> str:
        return canonical_json(self.to_json())

    @property
    def verified(self) -> bool:
        return self.verdict == "VERIFIED"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def chain_term(ring: HopfRing, r: int, h: int) -> HopfExpr:
    """(-1)^r [v_r] o b_1^{o p nu(r-1)} o b_p^{o (nu(h) - nu(r-1))}; zero past r = h."""
    p = ring.p
    if r > h:
        return ring.zero()
    top = nu(p, h)
    a = p * nu(p, r - 1)
    c = top - nu(p, r - 1)
    parts = [ring.v(r)]
    if a:
        parts.append(ring.bpow(1, a))
    if c:
        parts.append(ring.bpow(p, c))
    return circ_all(*parts).scale((-1) ** r)


def _step_zero(ctx: ReductionContext) -> Step:
    ring = ring_for(ctx.p, ctx.h, ctx.n)
    p, v = ctx.p, nu(ctx.p, ctx.h)
    u = ring.bpow(1, v)
    lhs = star_power(u, p)
    rhs = chain_term(ring, 0, ctx.h)
    conds = [SideCondition("Ravenel-Wilson relations consumed", True, "none: distributivity and the copolynomial coproduct only")]
    return Step(lhs, rhs, "distributivity", conds, "ok" if lhs == rhs else "failed")


def _step_r(ctx: ReductionContext, r: int) -> Step:
    ring = ring_for(ctx.p, ctx.h, ctx.n)
    p, h = ctx.p, ctx.h
    lhs, rhs = chain_term(ring, r, h), chain_term(ring, r + 1, h)
    x = circ(ring.v(r), ring.bpow(p, p ** r)) + circ(ring.v(r + 1), ring.bpow(1, p ** (r + 1)))
    tail = nu(p, h) - nu(p, r)
    conds: list = []
    try:
        if r == 0:
            rule = "ravenel-wilson(full, s^p)"
            ident = rw_extract(ReductionContext(p, h, ctx.n, "full"), 0, p)
            holds = x == ident.difference()
            conds.append(SideCondition(f"[p] o b{p} + [v1] o b1^(o {p}) = 0 from the full relation at s^{p}", holds,
                                       "; ".join(ident.notes)))
            killed = x
        else:
            rule = "ravenel-wilson(Q, s^p^(r+1)) + lift"
            ident = rw_extract(ReductionContext(p, h, ctx.n, "Q"), r, p ** (r + 1))
            k = p * nu(p, r - 1)
            conds.extend(lift_rule(ctx, x, k, r, [ident]))
            killed = circ(x, ring.bpow(1, k))
        if tail:
            killed = circ(killed, ring.bpow(p, tail))
        # lhs - rhs must be exactly (-1)^r times the killed expression
        match = (lhs - rhs) == killed.scale((-1) ** r)
        conds.append(SideCondition("lhs - rhs = (-1)^r (x o b1^(o k) o bp^(o tail))", match,
                                   f"k={p * nu(p, r - 1)}, tail={tail}"))
        status = "ok" if all(c.holds for c in conds) else "failed"
    except HopfError as exc:
        conds.append(SideCondition("exception", False, str(exc)))
        rule = rule if "rule" in locals() else "ravenel-wilson"
        status = "failed"
    return Step(lhs, rhs, rule, conds, status)


def verify_xpzero(p: int, h: int, n: int, workers: int | None = None) -> Certificate:
    """Replay u^p = [p] o b_p^{o nu(h)} = ... = 0, one checked step per level r."""
    ctx = ReductionContext(p, h, n, "full")
    log.info("verifying u^p = 0 for p=%d h=%d n=%d", p, h, n)
    jobs = [lambda: _step_zero(ctx)] + [lambda r=r: _step_r(ctx, r) for r in range(h + 1)]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            steps = list(pool.map(lambda f: f(), jobs))  # map keeps declaration order
    else:
        steps = [f() for f in jobs]
    final = steps[-1].rhs.is_zero()
    verdict = "VERIFIED" if final and all(s.status == "ok" for s in steps) else "REFUTED"
    return Certificate({"p": p, "h": h, "n": n}, steps, verdict)


def replay(cert: dict | str) -> tuple[bool, Certificate]:
    """Re-run the verifier from the certificate's parameters and compare bytes."""
    obj = json.loads(cert) if isinstance(cert, str) else cert
    try:
        params = obj["params"]
        fresh = verify_xpzero(int(params["p"]), int(params["h"]), int(params["n"]))
    except (KeyError, TypeError) as exc:
        raise HopfError(f"malformed certificate: {exc}") from exc
    return fresh.dumps() == canonical_json(obj), fresh


# ---------------------------------------------------------------------------
# f_0 in F_p[v_h^{+-1}][f]/(f^p - (-1)^{h-1} v_h f)

class F0Ring:
    """Elements are {f_degree: {v_h exponent: coeff}} with f_degree < p."""

    def __init__(self, p: int, h: int):
        if not is_prime(p):
            raise HopfError(f"{p} is not prime")
        if h < 1:
            raise HopfError("the f_0 relation needs h >= 1")
        self.p, self.h = p, h
        self.sign = (-1) ** (h - 1)

    def f(self) -> dict:
        return {1: {0: 1}}

    def mul(self, a: dict, b: dict) -> dict:
        p = self.p
        out: dict = {}
        for i, x in a.items():
            for j, y in b.items():
                for e1, c1 in x.items():
                    for e2, c2 in y.items():
                        deg, ve, c = i + j, e1 + e2, c1 * c2
                        while deg >= p:  # f^p = sign v_h f
                            deg -= p - 1
                            ve += 1
                            c *= self.sign
                        row = out.setdefault(deg, {})
                        row[ve] = (row.get(ve, 0) + c) % p
        return {d: {e: c for e, c in row.items() if c} for d, row in out.items() if any(row.values())}

    def power(self, a: dict, e: int) -> dict:
        result: dict = {0: {0: 1}}
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def closed_form(self, m: int) -> dict:
        """f^{p^m} = (sign v_h)^{nu(m-1)} f."""
        k = nu(self.p, m - 1)
        return {1: {k: (self.sign ** k) % self.p}}


def f0_nonnilpotence(p: int, h: int, m_max: int) -> dict:
    if m_max < 1:
        raise HopfError("m_max must be >= 1")
    R = F0Ring(p, h)
    rows = []
    x = R.f()
    for m in range(1, m_max + 1):
        x = R.power(x, p)  # x = f^{p^m}
        closed = R.closed_form(m)
        k = nu(p, m - 1)
        rows.append({
            "m": m,
            "exponent": p ** m,
            "vh_power": k,
            "coefficient": closed[1][k],
            "matches_closed_form": x == closed,
            "nonzero": bool(x),
        })
    return {
        "p": p, "h": h,
        "relation": f"f^{p} = {'+' if R.sign > 0 else '-'}v{h}*f",
        "rows": rows,
        "nilpotent": not all(r["nonzero"] and r["matches_closed_form"] for r in rows),
    }
