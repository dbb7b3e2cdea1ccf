"""Dieudonne modules of one-dimensional formal groups as matrix data.

Convention (covariant): F is phi-semilinear and V is phi^{-1}-semilinear,

    F(v) = Fmat . phi(v),        V(v) = Vmat . phi^{-1}(v),

with column j of a matrix holding the image of basis vector j.  Every
semilinear application in this module goes through `semilinear_apply`.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from .padic import (
    DivisibilityError,
    PadicError,
    PrecisionError,
    RingConfig,
    WittElement,
    witt_from_json,
)

Matrix = tuple[tuple[WittElement, ...], ...]


class DieudonneError(ValueError):
    pass


# ---------------------------------------------------------------------------
# matrices over W(k)

def mat(ring: RingConfig, rows: Sequence[Sequence[int | WittElement]]) -> Matrix:
    return tuple(tuple(x if isinstance(x, WittElement) else ring.element(x) for x in row) for row in rows)


def identity(ring: RingConfig, n: int, scale: int = 1) -> Matrix:
    return tuple(tuple(ring.element(scale if i == j else 0) for j in range(n)) for i in range(n))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for t in range(1, k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_frobenius(a: Matrix, power: int = 1) -> Matrix:
    """Entrywise phi^power; negative powers apply phi^{-1}."""
    return tuple(tuple(x.frobenius(power) for x in row) for row in a)


def mat_equal(a: Matrix, b: Matrix) -> bool:
    return len(a) == len(b) and all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def mat_min_prec(a: Matrix) -> int:
    return min(x.prec for row in a for x in row)


def det(a: Matrix) -> WittElement:
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    acc = None
    for j in range(n):
        minor = tuple(tuple(row[c] for c in range(n) if c != j) for row in a[1:])
        term = a[0][j] * det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def mat_inv(a: Matrix) -> Matrix:
    """Gauss-Jordan over W(k); pivots must be units."""
    n = len(a)
    ring = a[0][0].ring
    work = [list(row) + [ring.element(1 if i == j else 0) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col].is_unit()), None)
        if pivot is None:
            raise DieudonneError("matrix is not invertible over W(k)")
        work[col], work[pivot] = work[pivot], work[col]
        inv = work[col][col].inv()
        work[col] = [x * inv for x in work[col]]
        for r in range(n):
            if r != col and not work[r][col].is_zero():
                c = work[r][col]
                work[r] = [x - c * y for x, y in zip(work[r], work[col])]
    return tuple(tuple(row[n:]) for row in work)


def rank_mod_p(a: Matrix) -> int:
    """Rank of the reduction of a over the residue field."""
    if not a:
        return 0
    fld = a[0][0].ring.residue_field()
    rows = [[x.reduce().code for x in row] for row in a]
    rank = 0
    ncols = len(rows[0])
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = fld.inv(rows[rank][col])
        rows[rank] = [fld.mul(x, inv) for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                c = rows[r][col]
                rows[r] = [fld.sub(x, fld.mul(c, y)) for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def semilinear_apply(matrix: Matrix, vec: Sequence[WittElement], twist: int) -> tuple[WittElement, ...]:
    """matrix . phi^twist(vec); twist=+1 for F, -1 for V."""
    tw = [x.frobenius(twist) for x in vec]
    out = []
    for row in matrix:
        acc = row[0] * tw[0]
        for m, x in zip(row[1:], tw[1:]):
            acc = acc + m * x
        out.append(acc)
    return tuple(out)


def semilinear_compose(outer: Matrix, outer_twist: int, inner: Matrix) -> Matrix:
    """Matrix of (outer-semilinear) o (inner) acting on coordinates: outer . phi^t(inner)."""
    return mat_mul(outer, mat_frobenius(inner, outer_twist))


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DieudonneModule:
    ring: RingConfig
    rank: int
    F: Matrix
    V: Matrix
    # dim_k M/VM; 1 for formal groups, C(h-1, m-1) for Lambda^m of one
    dimension: int = 1

    def __post_init__(self):
        h = self.rank
        if not 0 <= self.dimension <= h:
            raise DieudonneError(f"dimension {self.dimension} outside 0..{h}")
        for name, m in (("F", self.F), ("V", self.V)):
            if len(m) != h or any(len(row) != h for row in m):
                raise DieudonneError(f"{name} matrix shape does not match rank {h}")
            if any(x.ring != self.ring for row in m for x in row):
                raise DieudonneError(f"{name} matrix entries live in a different ring")

    @property
    def precision(self) -> int:
        return min(mat_min_prec(self.F), mat_min_prec(self.V))

    def apply_F(self, vec: Sequence[WittElement]) -> tuple[WittElement, ...]:
        return semilinear_apply(self.F, vec, +1)

    def apply_V(self, vec: Sequence[WittElement]) -> tuple[WittElement, ...]:
        return semilinear_apply(self.V, vec, -1)

    def conjugate(self, P: Matrix) -> "DieudonneModule":
        """The same module in the basis given by the columns of P."""
        Pinv = mat_inv(P)
        F = mat_mul(Pinv, semilinear_compose(self.F, +1, P))
        V = mat_mul(Pinv, semilinear_compose(self.V, -1, P))
        return DieudonneModule(self.ring, self.rank, F, V, self.dimension)

    def to_json(self) -> dict:
        out = {
            "ring": self.ring.to_json(),
            "rank": self.rank,
            "F": [[x.to_json() for x in row] for row in self.F],
            "V": [[x.to_json() for x in row] for row in self.V],
        }
        if self.dimension != 1:
            out["dimension"] = self.dimension
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DieudonneModule":
        try:
            ring = RingConfig.from_json(obj["ring"])
            rank = int(obj["rank"])
            F = tuple(tuple(witt_from_json(ring, x) for x in row) for row in obj["F"])
            V = tuple(tuple(witt_from_json(ring, x) for x in row) for row in obj["V"])
            dimension = int(obj.get("dimension", 1))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DieudonneError(f"malformed module: {exc}") from exc
        return cls(ring, rank, F, V, dimension)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]
    precision: int

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "precision": self.precision,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def _fmt(m: Matrix) -> str:
    return "[" + ", ".join("[" + ", ".join(str(list(x.coords) if len(x.coords) > 1 else x.coords[0]) for x in row) + "]" for row in m) + "]"


def validate(M: DieudonneModule) -> ValidationReport:
    h, ring = M.rank, M.ring
    pI = identity(ring, h, ring.p)
    checks = []

    FV = semilinear_compose(M.F, +1, M.V)
    checks.append(CheckResult("FV=p", mat_equal(FV, pI), "" if mat_equal(FV, pI) else f"F.phi(V) = {_fmt(FV)}"))
    VF = semilinear_compose(M.V, -1, M.F)
    checks.append(CheckResult("VF=p", mat_equal(VF, pI), "" if mat_equal(VF, pI) else f"V.phi^-1(F) = {_fmt(VF)}"))

    r = rank_mod_p(M.V)
    want = h - M.dimension
    checks.append(CheckResult(
        f"dim M/VM = {M.dimension}", r == want, "" if r == want else f"rank(V mod p) = {r}, expected {want}"))

    # V^h as a semilinear operator: V . phi^-1(V) . ... . phi^{-(h-1)}(V)
    power = M.V
    for i in range(1, h):
        power = mat_mul(power, mat_frobenius(M.V, -i))
    nil = all(not x.is_unit() for row in power for x in row)
    checks.append(CheckResult("V-complete", nil, "" if nil else "V^h is not zero mod p"))
    return ValidationReport(tuple(checks), M.precision)


# ---------------------------------------------------------------------------
# standard modules

def gm_module(ring: RingConfig) -> DieudonneModule:
    """Dieudonne module of the multiplicative formal group: F = 1, V = p."""
    return DieudonneModule(ring, 1, mat(ring, [[1]]), mat(ring, [[ring.p]]))


def honda_module(ring: RingConfig, h: int) -> DieudonneModule:
    """Height-h Honda module: V e_i = e_{i+1}, V e_h = p e_1; F e_1 = e_h, F e_{i+1} = p e_i."""
    if h < 1:
        raise DieudonneError("height must be >= 1")
    p = ring.p
    F = [[0] * h for _ in range(h)]
    V = [[0] * h for _ in range(h)]
    if h == 1:
        return gm_module(ring)
    F[h - 1][0] = 1
    for i in range(h - 1):
        F[i][i + 1] = p
        V[i + 1][i] = 1
    V[0][h - 1] = p
    return DieudonneModule(ring, h, mat(ring, F), mat(ring, V))


def make_Na(a: WittElement) -> DieudonneModule:
    """Rank-2 module with F w1 = a^{-1} w2, F w2 = p w1, V w1 = w2, V w2 = a p w1."""
    ring = a.ring
    if ring.d != 1:
        raise DieudonneError("N_a is defined over W(F_p) only (d = 1)")
    if not a.is_unit():
        raise DieudonneError(f"a = {a!r} is not a unit")
    p = ring.element(ring.p)
    z = ring.zero()
    F = ((z, p), (a.inv(), z))
    V = ((z, a * p), (ring.one(), z))
    return DieudonneModule(ring, 2, F, V)


# ---------------------------------------------------------------------------
# exterior powers

def compound(a: Matrix, m: int) -> Matrix:
    """m-th compound matrix: entry (I, J) = det a[I, J], subsets in lex order."""
    n = len(a)
    subsets = list(itertools.combinations(range(n), m))
    return tuple(
        tuple(det(tuple(tuple(a[i][j] for j in J) for i in I)) for J in subsets)
        for I in subsets
    )


def exterior_power(M: DieudonneModule, m: int) -> DieudonneModule:
    """Lambda^m M on the basis e_I (I increasing, lex order).

    V acts by Lambda^m(Vmat); F acts by p^{-(m-1)} Lambda^m(Fmat), which
    must be integral for a genuine Dieudonne module.
    """
    if not 1 <= m <= M.rank:
        raise DieudonneError(f"exterior degree {m} outside 1..{M.rank}")
    if m == 1:
        return M
    V = compound(M.V, m)
    raw = compound(M.F, m)
    try:
        F = tuple(tuple(x.div_p(m - 1) for x in row) for row in raw)
    except DivisibilityError as exc:
        raise DieudonneError(f"Lambda^{m}(F) is not divisible by p^{m - 1}: {exc}") from exc
    except PrecisionError as exc:
        raise DieudonneError(f"precision exhausted in Lambda^{m}: {exc}") from exc
    return DieudonneModule(M.ring, len(V), F, V, math.comb(M.rank - 1, m - 1))


# ---------------------------------------------------------------------------
# rank one classification

@dataclass(frozen=True)
class Rank1Invariant:
    """F u = alpha u on a generator u; the classical constant is a = alpha^{-1}."""

    alpha: WittElement
    is_unit: bool

    def to_json(self) -> dict:
        return {"alpha": self.alpha.to_json(), "precision": self.alpha.prec, "is_unit": self.is_unit}


def rank1_invariant(M: DieudonneModule) -> Rank1Invariant:
    if M.rank != 1:
        raise DieudonneError(f"rank1_invariant needs rank 1, got {M.rank}")
    alpha = M.F[0][0]
    return Rank1Invariant(alpha, alpha.is_unit())


@dataclass(frozen=True)
class MultiplicativityVerdict:
    multiplicative: bool
    reason: str
    invariant: Rank1Invariant | None = None
    witness: WittElement | None = None
    experimental: bool = False

    def __bool__(self):
        return self.multiplicative

    def to_json(self) -> dict:
        out = {"multiplicative": self.multiplicative, "reason": self.reason}
        if self.invariant is not None:
            out["invariant"] = self.invariant.to_json()
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.experimental:
            out["experimental"] = True
        return out


def _solve_hilbert90(alpha: WittElement) -> WittElement | None:
    """Unit lam with lam = alpha * phi(lam), built one p-adic digit at a time."""
    ring = alpha.ring
    fld = ring.residue_field()
    prec = alpha.prec
    a_bar = alpha.reduce().code
    # residue equation: lam = a_bar * lam^p
    lam_bar = next((x for x in range(1, fld.q) if fld.mul(a_bar, fld.frob(x)) == x), None)
    if lam_bar is None:
        return None
    lam = ring.element(fld.to_coords(lam_bar), prec)
    p = ring.p
    for k in range(1, prec):
        err = alpha * lam.frobenius() - lam
        coords = [c // p ** k % p for c in err.coords]
        e = fld.from_coords(coords)
        # mu - a_bar mu^p = e over the residue field
        mu = next((x for x in fld.elements() if fld.sub(x, fld.mul(a_bar, fld.frob(x))) == e), None)
        if mu is None:
            return None
        lam = lam + ring.element([c * p ** k for c in fld.to_coords(mu)], prec)
    return lam


def is_multiplicative(M: DieudonneModule) -> MultiplicativityVerdict:
    """Is M isomorphic to the Dieudonne module of G_m (to working precision)?"""
    if M.rank != 1:
        return MultiplicativityVerdict(False, "rank")
    inv = rank1_invariant(M)
    alpha = inv.alpha
    if not inv.is_unit:
        return MultiplicativityVerdict(False, "alpha not a unit", inv)
    if M.ring.d == 1:
        ok = alpha == 1
        return MultiplicativityVerdict(ok, "alpha == 1" if ok else "alpha != 1", inv, alpha.ring.element(1, alpha.prec) if ok else None)
    if not alpha.norm() == 1:
        return MultiplicativityVerdict(False, "norm(alpha) != 1", inv, experimental=True)
    lam = _solve_hilbert90(alpha)
    if lam is None:
        return MultiplicativityVerdict(False, "norm(alpha) == 1 but no digit-by-digit solution", inv, experimental=True)
    return MultiplicativityVerdict(True, "norm(alpha) == 1", inv, lam, experimental=True)


def top_exterior_is_gm(M: DieudonneModule) -> tuple[MultiplicativityVerdict, Rank1Invariant]:
    top = exterior_power(M, M.rank)
    return is_multiplicative(top), rank1_invariant(top)


def random_invertible(ring: RingConfig, n: int, rng: random.Random) -> Matrix:
    while True:
        P = tuple(tuple(ring.random_element(rng) for _ in range(n)) for _ in range(n))
        if det(P).is_unit():
            return P
