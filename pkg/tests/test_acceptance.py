"""Acceptance suite: one test per criterion, each printing a pass/fail line."""
import itertools
import random
import time

import sympy

from chromalg import bp, dieudonne as dd, fgl, hopfring as H
from chromalg.padic import ResidueField, make_ring


def elapsed(t0):
    return time.perf_counter() - t0


def na_sample(p, count=20, seed=0):
    ring = make_ring(p, 1, 8)
    rng = random.Random(seed + p)
    sample = [ring.element(-1)] + [ring.random_unit(rng) for _ in range(count - 1)]
    return ring, sample


def test_criterion_1_exterior_square(criterion):
    t0 = time.perf_counter()
    ok = True
    for p in (2, 3, 5):
        ring, sample = na_sample(p)
        for a in sample:
            L = dd.exterior_power(dd.make_Na(a), 2)
            a_int = a.coords[0]
            mod = p ** 7
            ok &= L.rank == 1 and L.precision == 7
            ok &= L.F[0][0].coords[0] % mod == (-pow(a_int, -1, p ** 8)) % mod
            ok &= L.V[0][0].coords[0] % mod == (-a_int * p) % mod
    t = elapsed(t0)
    ok = bool(ok) and t < 1.0
    criterion(1, ok, f"Lambda^2 N_a for p in 2,3,5; 20 units each; {t:.3f}s")
    assert ok


def test_criterion_2_gm_detection(criterion):
    t0 = time.perf_counter()
    ok, hits = True, 0
    for p in (2, 3, 5):
        ring, sample = na_sample(p)
        for a in sample:
            expect = (a.coords[0] + 1) % p ** 7 == 0
            got = bool(dd.is_multiplicative(dd.exterior_power(dd.make_Na(a), 2)))
            ok &= got == expect
            hits += got
    t = elapsed(t0)
    ok = bool(ok) and hits >= 3 and t < 1.0
    criterion(2, ok, f"multiplicative iff a = -1; {hits} positives; {t:.3f}s")
    assert ok


def test_criterion_3_dieudonne_suite(criterion):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    configs = [(2, 1, 8), (3, 1, 6), (5, 1, 5), (2, 2, 6), (3, 2, 5)]
    checked, ok = 0, True
    for i in range(200):
        ring = make_ring(*configs[i % len(configs)])
        kind = rng.randrange(3)
        if kind == 0:
            M = dd.honda_module(ring, rng.randint(1, 4))
        elif kind == 1 or ring.d > 1:
            M = dd.gm_module(ring)
        else:
            M = dd.make_Na(ring.random_unit(rng))
        M = M.conjugate(dd.random_invertible(ring, M.rank, rng))
        ok &= dd.validate(M).ok
        for m in range(1, M.rank + 1):
            ok &= dd.validate(dd.exterior_power(M, m)).ok
            checked += 1
    t = elapsed(t0)
    ok = bool(ok) and t < 10.0
    criterion(3, ok, f"200 conjugated modules, {checked} exterior powers validated; {t:.2f}s")
    assert ok


def test_criterion_4_honda_pseries(criterion):
    t0 = time.perf_counter()
    ok = True
    for p, n, D in [(2, 1, 8), (2, 2, 16), (3, 1, 27), (3, 2, 81)]:
        F = fgl.honda_law(p, n, D)
        ok &= fgl.p_series(F).terms() == {p ** n: 1}
        ok &= fgl.height(F) == fgl.Height(n, True)
    t = elapsed(t0)
    ok = bool(ok) and t < 30.0
    criterion(4, ok, f"[p](x) = x^(p^n) and height n for four Honda laws; {t:.2f}s")
    assert ok


def brute_gm_homs_f2(D):
    """Exhaustive search over F_2^D with sympy polynomial arithmetic."""
    x, y = sympy.symbols("x y")
    sums = [sympy.Poly(x + y + x * y, x, y, modulus=2) ** k for k in range(D + 1)]

    def trunc(P):
        return {m: c for m, c in P.terms() if sum(m) <= D and int(c) % 2}

    found = set()
    for c in itertools.product((0, 1), repeat=D):
        f = [0, *c]
        fx = sympy.Poly(sum(f[k] * x ** k for k in range(1, D + 1)) or 0, x, y, modulus=2)
        fy = sympy.Poly(sum(f[k] * y ** k for k in range(1, D + 1)) or 0, x, y, modulus=2)
        lhs = sympy.Poly(0, x, y, modulus=2)
        for k in range(1, D + 1):
            if f[k]:
                lhs += sums[k]
        if trunc(lhs) == trunc(fx + fy + fx * fy):
            found.add(tuple(f))
    return found


def test_criterion_5_westerland_oracle(criterion):
    t0 = time.perf_counter()
    ok = True
    counts = []
    for D in range(2, 7):
        got = {f.coeffs for f in fgl.westerland_solve(fgl.gm_law(2, D)).solutions}
        want = brute_gm_homs_f2(D)
        ok &= got == want
        counts.append(len(got))
    t = elapsed(t0)
    ok = bool(ok) and t < 10.0
    criterion(5, ok, f"solver = brute force for D = 2..6 (sizes {counts}); {t:.2f}s")
    assert ok


def test_criterion_6_negative_detection(criterion):
    t0 = time.perf_counter()
    ok = fgl.detect_gm(fgl.ga_law(2, 20)).verdict == "NO-NONZERO-HOM-TO-DEGREE-20"
    ok &= fgl.detect_gm(fgl.honda_law(3, 2, 30)).verdict == "NO-NONZERO-HOM-TO-DEGREE-30"
    v = fgl.detect_gm(fgl.gm_law(2, 8))
    ok &= v.is_iso and v.witness.g[1] != 0
    rng = random.Random(6)
    for p, D in [(2, 8), (3, 9), (2, 12), (3, 9), (5, 10)]:
        fld = ResidueField(p, 1)
        G = fgl.conjugate_law(fgl.gm_law(fld, D), fgl.random_coordinate_change(fld, D, rng))
        v = fgl.detect_gm(G)
        ok &= v.is_iso and v.witness is not None and v.witness.g[1] != 0
    t = elapsed(t0)
    ok = bool(ok) and t < 30.0
    criterion(6, ok, f"Ga and Honda(3,2) have no hom; Gm and 5 conjugates ISO; {t:.2f}s")
    assert ok


def test_criterion_7_bp_pseries(criterion):
    bp._cache.clear()  # time from a cold cache
    t0 = time.perf_counter()
    ok = True
    for p, h in [(2, 1), (2, 2), (3, 1)]:
        D = p ** (h + 2)
        law = bp.bp_fgl_mod_p(p, h, D)  # raises BPError on a non-integral coefficient
        ok &= law.coefficient(1, 0) == 1
        for r in range(1, h + 1):
            k, c = bp.p_series_mod_Ir(p, h, r, D)[0]
            ok &= k == p ** r and c == bp.GradedPoly.var(p, h, r)
    t = elapsed(t0)
    ok = bool(ok) and t < 60.0
    criterion(7, ok, f"lowest term v_r x^(p^r) for (2,1),(2,2),(3,1); {t:.2f}s")
    assert ok


def test_criterion_8_certificate(criterion):
    bp._cache.clear()  # cold caches, so the timings are honest
    H._rings.clear()
    ok = True
    times = {}
    for p, h, n in [(2, 0, 2), (2, 1, 3), (3, 1, 3)]:
        t0 = time.perf_counter()
        cert = H.verify_xpzero(p, h, n)
        times[(p, h, n)] = elapsed(t0)
        ok &= cert.verified and all(s.status == "ok" for s in cert.steps)
        ok &= all(c.holds for s in cert.steps for c in s.side_conditions)
        same, fresh = H.replay(cert.dumps())
        ok &= same and fresh.dumps() == cert.dumps()
    ok = bool(ok) and times[(3, 1, 3)] < 300.0
    detail = ", ".join(f"{k}: {v:.3f}s" for k, v in times.items())
    criterion(8, ok, f"VERIFIED and byte-identical replay; {detail}")
    assert ok


def f0_oracle(p, h, e):
    f, v = sympy.symbols("f v")
    rel = sympy.Poly(f ** p - (-1) ** (h - 1) * v * f, f, v, modulus=p)
    acc = sympy.Poly(f, f, v, modulus=p)
    for _ in range(e - 1):  # repeated multiplication by f in the quotient
        acc = (acc * sympy.Poly(f, f, v, modulus=p)).rem(rel)
    return {m: int(c) % p for m, c in zip(acc.monoms(), acc.coeffs()) if int(c) % p}


def test_criterion_9_f0(criterion):
    cases = [(2, 1), (2, 2), (3, 1), (3, 2)]
    t0 = time.perf_counter()
    reports = {c: H.f0_nonnilpotence(*c, 5) for c in cases}
    t = elapsed(t0)
    ok = True
    for (p, h), rep in reports.items():
        ok &= not rep["nilpotent"]
        for row in rep["rows"]:
            want = f0_oracle(p, h, p ** row["m"])
            ok &= want == {(1, row["vh_power"]): row["coefficient"]}
            ok &= row["vh_power"] == bp.nu(p, row["m"] - 1) and row["nonzero"]
    ok = bool(ok) and t < 1.0
    criterion(9, ok, f"f^(p^m) = (+-v_h)^nu(m-1) f for m <= 5, 4 cases; {t:.3f}s")
    assert ok


def test_criterion_10_nu(criterion):
    t0 = time.perf_counter()
    ok = bp.nu(2, 1) == 3 and 2 * bp.nu(2, 1) == 6
    for p in (2, 3, 5, 7):
        for m in range(0, 7):
            ok &= bp.nu(p, m) == (p ** (m + 1) - 1) // (p - 1)
            ok &= bp.nu(p, m) == p * bp.nu(p, m - 1) + 1
    t = elapsed(t0)
    ok = bool(ok) and t < 1.0
    criterion(10, ok, f"closed form and recursion for p <= 7, m <= 6; {t:.4f}s")
    assert ok
